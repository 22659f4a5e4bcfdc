#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>

#include "sdesym/expr.hpp"

namespace sdesym {

/// Declares what identifiers are legal in a piece of expression text:
/// x1..xn (or an alias prefix, e.g. y for transform inverses), w1..wm,
/// t, the function names, and the model's named constants.
struct ParseContext {
  int n = 0;
  int m = 0;
  std::set<std::string> constants;
  std::string state_prefix = "x";
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int column_)
      : std::runtime_error(what + " (column " + std::to_string(column_) + ")"),
        column(column_) {}
  int column;  // 1-based
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const ParseContext& ctx)
      : text_(text), ctx_(ctx) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view text_;
  const ParseContext& ctx_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  // expr := term (('+'|'-') term)*
  Expr expression() {
    Expr e = term();
    for (;;) {
      if (consume('+'))
        e = e + term();
      else if (consume('-'))
        e = e - term();
      else
        return e;
    }
  }

  // term := factor (('*'|'/') factor)*
  Expr term() {
    Expr e = factor();
    for (;;) {
      if (consume('*'))
        e = e * factor();
      else if (consume('/'))
        e = e / factor();
      else
        return e;
    }
  }

  // factor := '-' factor | base ('^' factor)?     (pow binds above unary -)
  Expr factor() {
    if (consume('-')) return -factor();
    Expr b = base();
    if (consume('^')) return pow(b, factor());
    return b;
  }

  Expr base() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        ++pos_;
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // the e belongs to an identifier or is junk
      }
    }
    std::string tok(text_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return Expr::number(v);
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number '" + tok + "'");
    }
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));

    static const std::map<std::string, Kind> functions = {
        {"sin", Kind::Sin},   {"cos", Kind::Cos}, {"tan", Kind::Tan},
        {"atan", Kind::Atan}, {"exp", Kind::Exp}, {"log", Kind::Log},
        {"sqrt", Kind::Sqrt}};
    if (auto it = functions.find(name); it != functions.end()) {
      if (!consume('(')) {
        pos_ = start;
        fail("function '" + name + "' requires parenthesized argument");
      }
      Expr arg = expression();
      if (!consume(')')) fail("expected ')'");
      return Expr::make(it->second, {arg});
    }

    if (name == "t") return Expr::time();

    auto indexed = [&](const std::string& prefix) -> std::optional<int> {
      if (name.size() <= prefix.size() ||
          name.compare(0, prefix.size(), prefix) != 0)
        return std::nullopt;
      for (std::size_t i = prefix.size(); i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i])))
          return std::nullopt;
      return std::stoi(name.substr(prefix.size()));
    };
    if (auto idx = indexed(ctx_.state_prefix)) {
      if (*idx < 1 || *idx > ctx_.n) {
        pos_ = start;
        fail("state variable index out of declared range: " + name);
      }
      return Expr::state(*idx);
    }
    if (auto idx = indexed("w")) {
      if (*idx < 1 || *idx > ctx_.m) {
        pos_ = start;
        fail("wiener variable index out of declared range: " + name);
      }
      return Expr::wiener(*idx);
    }
    if (ctx_.constants.count(name)) return Expr::param(name);
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }
};

}  // namespace detail

/// Parses the documented grammar. Precedence: pow > unary minus > mul/div >
/// add/sub; all left-associative except pow (right-associative).
inline Expr parse(std::string_view text, const ParseContext& ctx) {
  return detail::Parser(text, ctx).run();
}

}  // namespace sdesym
