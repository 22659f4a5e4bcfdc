#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdesym {

/// Which family a variable belongs to: the time variable t, a state
/// coordinate x1..xn, or a Wiener coordinate w1..wm.
enum class VarKind { Time, State, Wiener };

enum class Kind {
  Number,
  Param,  // named constant, resolved at evaluation time
  Var,
  Neg,
  Sin,
  Cos,
  Tan,
  Atan,
  Exp,
  Log,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

inline bool is_unary(Kind k) {
  return k == Kind::Neg || k == Kind::Sin || k == Kind::Cos || k == Kind::Tan ||
         k == Kind::Atan || k == Kind::Exp || k == Kind::Log || k == Kind::Sqrt;
}

inline bool is_binary(Kind k) {
  return k == Kind::Add || k == Kind::Sub || k == Kind::Mul || k == Kind::Div ||
         k == Kind::Pow;
}

class Expr;
using ExprVec = std::vector<Expr>;
using ExprMatrix = std::vector<ExprVec>;
using ConstMap = std::map<std::string, double>;

namespace detail {
struct Node {
  Kind kind;
  double number = 0.0;
  VarKind vkind = VarKind::Time;
  int index = 0;  // 1-based for State/Wiener
  std::string name;
  std::vector<Expr> kids;
};
}  // namespace detail

/// Immutable symbolic expression tree. Copies share structure; all
/// operations build new trees, so values are safe to use concurrently.
class Expr {
 public:
  Expr() : node_(zero_node()) {}

  static Expr number(double v) {
    auto n = std::make_shared<detail::Node>();
    n->kind = Kind::Number;
    n->number = v;
    return Expr(std::move(n));
  }
  static Expr param(std::string name) {
    auto n = std::make_shared<detail::Node>();
    n->kind = Kind::Param;
    n->name = std::move(name);
    return Expr(std::move(n));
  }
  static Expr variable(VarKind vk, int index = 0) {
    auto n = std::make_shared<detail::Node>();
    n->kind = Kind::Var;
    n->vkind = vk;
    n->index = index;
    return Expr(std::move(n));
  }
  static Expr time() { return variable(VarKind::Time); }
  static Expr state(int i) { return variable(VarKind::State, i); }
  static Expr wiener(int k) { return variable(VarKind::Wiener, k); }

  static Expr make(Kind kind, ExprVec kids) {
    auto n = std::make_shared<detail::Node>();
    n->kind = kind;
    n->kids = std::move(kids);
    return Expr(std::move(n));
  }

  Kind kind() const { return node_->kind; }
  double number_value() const { return node_->number; }
  VarKind var_kind() const { return node_->vkind; }
  int var_index() const { return node_->index; }
  const std::string& param_name() const { return node_->name; }
  const std::vector<Expr>& kids() const { return node_->kids; }
  const Expr& kid(std::size_t i) const { return node_->kids[i]; }

  bool is_number() const { return node_->kind == Kind::Number; }
  bool is_number(double v) const {
    return node_->kind == Kind::Number && node_->number == v;
  }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  static const std::shared_ptr<const detail::Node>& zero_node() {
    static const std::shared_ptr<const detail::Node> z = [] {
      auto n = std::make_shared<detail::Node>();
      n->kind = Kind::Number;
      n->number = 0.0;
      return n;
    }();
    return z;
  }
  std::shared_ptr<const detail::Node> node_;
};

inline Expr operator+(const Expr& a, const Expr& b) {
  return Expr::make(Kind::Add, {a, b});
}
inline Expr operator-(const Expr& a, const Expr& b) {
  return Expr::make(Kind::Sub, {a, b});
}
inline Expr operator*(const Expr& a, const Expr& b) {
  return Expr::make(Kind::Mul, {a, b});
}
inline Expr operator/(const Expr& a, const Expr& b) {
  return Expr::make(Kind::Div, {a, b});
}
inline Expr operator-(const Expr& a) { return Expr::make(Kind::Neg, {a}); }
inline Expr operator+(const Expr& a, double b) { return a + Expr::number(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::number(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::number(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::number(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::number(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::number(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / Expr::number(b); }
inline Expr operator/(double a, const Expr& b) { return Expr::number(a) / b; }

inline Expr pow(const Expr& a, const Expr& b) {
  return Expr::make(Kind::Pow, {a, b});
}
inline Expr pow(const Expr& a, double b) { return pow(a, Expr::number(b)); }
inline Expr sin(const Expr& a) { return Expr::make(Kind::Sin, {a}); }
inline Expr cos(const Expr& a) { return Expr::make(Kind::Cos, {a}); }
inline Expr tan(const Expr& a) { return Expr::make(Kind::Tan, {a}); }
inline Expr atan(const Expr& a) { return Expr::make(Kind::Atan, {a}); }
inline Expr exp(const Expr& a) { return Expr::make(Kind::Exp, {a}); }
inline Expr log(const Expr& a) { return Expr::make(Kind::Log, {a}); }
inline Expr sqrt(const Expr& a) { return Expr::make(Kind::Sqrt, {a}); }

/// Total order on expression trees; 0 iff structurally equal.
inline int compare(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case Kind::Number: {
      double x = a.number_value(), y = b.number_value();
      if (x < y) return -1;
      if (x > y) return 1;
      // distinguish -0.0 / NaN payloads so the order is total
      std::uint64_t ux, uy;
      std::memcpy(&ux, &x, 8);
      std::memcpy(&uy, &y, 8);
      return ux == uy ? 0 : (ux < uy ? -1 : 1);
    }
    case Kind::Param:
      return a.param_name().compare(b.param_name()) < 0   ? -1
             : a.param_name().compare(b.param_name()) > 0 ? 1
                                                          : 0;
    case Kind::Var:
      if (a.var_kind() != b.var_kind())
        return a.var_kind() < b.var_kind() ? -1 : 1;
      if (a.var_index() != b.var_index())
        return a.var_index() < b.var_index() ? -1 : 1;
      return 0;
    default: {
      if (a.kids().size() != b.kids().size())
        return a.kids().size() < b.kids().size() ? -1 : 1;
      for (std::size_t i = 0; i < a.kids().size(); ++i) {
        int c = compare(a.kid(i), b.kid(i));
        if (c != 0) return c;
      }
      return 0;
    }
  }
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  return compare(a, b) == 0;
}

/// A point (t, x, w) at which expressions are evaluated.
struct Binding {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> w;
};

/// Evaluation failure (domain violation or unbound symbol). `path` locates
/// the offending subexpression as a /-separated child-index chain.
struct EvalError : std::runtime_error {
  EvalError(const std::string& what, std::string path_)
      : std::runtime_error(what + " at subexpression path " +
                           (path_.empty() ? "/" : path_)),
        path(std::move(path_)) {}
  std::string path;
};

namespace detail {

inline double eval_rec(const Expr& e, const Binding& b, const ConstMap& consts,
                       std::string& path) {
  auto fail = [&](const std::string& msg) -> double {
    throw EvalError(msg, path);
  };
  switch (e.kind()) {
    case Kind::Number:
      return e.number_value();
    case Kind::Param: {
      auto it = consts.find(e.param_name());
      if (it == consts.end()) fail("unbound constant '" + e.param_name() + "'");
      return it->second;
    }
    case Kind::Var:
      switch (e.var_kind()) {
        case VarKind::Time:
          return b.t;
        case VarKind::State:
          if (e.var_index() < 1 ||
              e.var_index() > static_cast<int>(b.x.size()))
            fail("state index out of range in binding");
          return b.x[static_cast<std::size_t>(e.var_index() - 1)];
        case VarKind::Wiener:
          if (e.var_index() < 1 ||
              e.var_index() > static_cast<int>(b.w.size()))
            fail("wiener index out of range in binding");
          return b.w[static_cast<std::size_t>(e.var_index() - 1)];
      }
      fail("bad variable");
    default:
      break;
  }
  std::vector<double> vals(e.kids().size());
  for (std::size_t i = 0; i < e.kids().size(); ++i) {
    std::size_t len = path.size();
    path += '/';
    path += std::to_string(i);
    vals[i] = eval_rec(e.kid(i), b, consts, path);
    path.resize(len);
  }
  switch (e.kind()) {
    case Kind::Neg:
      return -vals[0];
    case Kind::Sin:
      return std::sin(vals[0]);
    case Kind::Cos:
      return std::cos(vals[0]);
    case Kind::Tan:
      return std::tan(vals[0]);
    case Kind::Atan:
      return std::atan(vals[0]);
    case Kind::Exp:
      return std::exp(vals[0]);
    case Kind::Log:
      if (vals[0] <= 0.0) fail("log of non-positive value");
      return std::log(vals[0]);
    case Kind::Sqrt:
      if (vals[0] < 0.0) fail("sqrt of negative value");
      return std::sqrt(vals[0]);
    case Kind::Add:
      return vals[0] + vals[1];
    case Kind::Sub:
      return vals[0] - vals[1];
    case Kind::Mul:
      return vals[0] * vals[1];
    case Kind::Div:
      if (vals[1] == 0.0) fail("division by zero");
      return vals[0] / vals[1];
    case Kind::Pow: {
      if (vals[0] == 0.0 && vals[1] == 0.0) return 1.0;  // 0^0 := 1
      if (vals[0] == 0.0 && vals[1] < 0.0) fail("zero base with negative exponent");
      if (vals[0] < 0.0 && vals[1] != std::rint(vals[1]))
        fail("negative base with non-integer exponent");
      return std::pow(vals[0], vals[1]);
    }
    default:
      fail("bad node");
  }
  return 0.0;
}

}  // namespace detail

/// IEEE double evaluation; deterministic, throws EvalError on domain
/// violations with the path of the offending subexpression.
inline double eval(const Expr& e, const Binding& b,
                   const ConstMap& consts = {}) {
  std::string path;
  return detail::eval_rec(e, b, consts, path);
}

/// Exact symbolic partial derivative with respect to one variable.
inline Expr diff(const Expr& e, VarKind vk, int index = 0) {
  auto d = [&](const Expr& u) { return diff(u, vk, index); };
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Param:
      return Expr::number(0.0);
    case Kind::Var:
      return (e.var_kind() == vk && e.var_index() == index)
                 ? Expr::number(1.0)
                 : Expr::number(0.0);
    case Kind::Neg:
      return -d(e.kid(0));
    case Kind::Sin:
      return cos(e.kid(0)) * d(e.kid(0));
    case Kind::Cos:
      return -(sin(e.kid(0)) * d(e.kid(0)));
    case Kind::Tan:
      return d(e.kid(0)) / pow(cos(e.kid(0)), 2.0);
    case Kind::Atan:
      return d(e.kid(0)) / (1.0 + pow(e.kid(0), 2.0));
    case Kind::Exp:
      return exp(e.kid(0)) * d(e.kid(0));
    case Kind::Log:
      return d(e.kid(0)) / e.kid(0);
    case Kind::Sqrt:
      return d(e.kid(0)) / (2.0 * sqrt(e.kid(0)));
    case Kind::Add:
      return d(e.kid(0)) + d(e.kid(1));
    case Kind::Sub:
      return d(e.kid(0)) - d(e.kid(1));
    case Kind::Mul:
      return d(e.kid(0)) * e.kid(1) + e.kid(0) * d(e.kid(1));
    case Kind::Div:
      return (d(e.kid(0)) * e.kid(1) - e.kid(0) * d(e.kid(1))) /
             pow(e.kid(1), 2.0);
    case Kind::Pow: {
      const Expr& u = e.kid(0);
      const Expr& v = e.kid(1);
      if (v.is_number()) {
        double c = v.number_value();
        return Expr::number(c) * pow(u, c - 1.0) * d(u);
      }
      // u^v = exp(v log u)
      return pow(u, v) * (d(v) * log(u) + v * d(u) / u);
    }
  }
  return Expr::number(0.0);
}

/// Variable substitution map; entries left unset are kept as-is.
struct Substitution {
  std::optional<Expr> t;
  std::vector<std::optional<Expr>> x;
  std::vector<std::optional<Expr>> w;
};

inline Expr substitute(const Expr& e, const Substitution& s) {
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Param:
      return e;
    case Kind::Var: {
      if (e.var_kind() == VarKind::Time && s.t) return *s.t;
      if (e.var_kind() == VarKind::State) {
        std::size_t i = static_cast<std::size_t>(e.var_index() - 1);
        if (i < s.x.size() && s.x[i]) return *s.x[i];
      }
      if (e.var_kind() == VarKind::Wiener) {
        std::size_t k = static_cast<std::size_t>(e.var_index() - 1);
        if (k < s.w.size() && s.w[k]) return *s.w[k];
      }
      return e;
    }
    default: {
      ExprVec kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids()) kids.push_back(substitute(k, s));
      return Expr::make(e.kind(), std::move(kids));
    }
  }
}

/// Replaces named constants by numbers (used to precompile hot-path
/// expressions before repeated evaluation).
inline Expr substitute_params(const Expr& e, const ConstMap& consts) {
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Var:
      return e;
    case Kind::Param: {
      auto it = consts.find(e.param_name());
      if (it == consts.end())
        throw std::invalid_argument("unbound constant '" + e.param_name() +
                                    "'");
      return Expr::number(it->second);
    }
    default: {
      ExprVec kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids())
        kids.push_back(substitute_params(k, consts));
      return Expr::make(e.kind(), std::move(kids));
    }
  }
}

/// True if any variable of the given kind occurs (index 0 matches any index).
inline bool contains(const Expr& e, VarKind vk, int index = 0) {
  if (e.kind() == Kind::Var)
    return e.var_kind() == vk && (index == 0 || e.var_index() == index);
  for (const auto& k : e.kids())
    if (contains(k, vk, index)) return true;
  return false;
}

inline bool contains_param(const Expr& e, const std::string& name) {
  if (e.kind() == Kind::Param) return e.param_name() == name;
  for (const auto& k : e.kids())
    if (contains_param(k, name)) return true;
  return false;
}

namespace detail {

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Precedence levels: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4, atoms 5.
inline void print_rec(const Expr& e, int parent_prec, std::string& out) {
  auto wrap = [&](int prec, auto&& body) {
    bool need = prec < parent_prec;
    if (need) out += '(';
    body();
    if (need) out += ')';
  };
  switch (e.kind()) {
    case Kind::Number: {
      double v = e.number_value();
      if (v < 0 || (v == 0 && std::signbit(v))) {
        wrap(3, [&] {
          out += '-';
          out += format_number(-v);
        });
      } else {
        out += format_number(v);
      }
      return;
    }
    case Kind::Param:
      out += e.param_name();
      return;
    case Kind::Var:
      switch (e.var_kind()) {
        case VarKind::Time:
          out += 't';
          return;
        case VarKind::State:
          out += 'x';
          out += std::to_string(e.var_index());
          return;
        case VarKind::Wiener:
          out += 'w';
          out += std::to_string(e.var_index());
          return;
      }
      return;
    case Kind::Neg:
      wrap(3, [&] {
        out += '-';
        print_rec(e.kid(0), 3, out);
      });
      return;
    case Kind::Add:
      wrap(1, [&] {
        print_rec(e.kid(0), 1, out);
        out += " + ";
        print_rec(e.kid(1), 2, out);
      });
      return;
    case Kind::Sub:
      wrap(1, [&] {
        print_rec(e.kid(0), 1, out);
        out += " - ";
        print_rec(e.kid(1), 2, out);
      });
      return;
    case Kind::Mul:
      wrap(2, [&] {
        print_rec(e.kid(0), 2, out);
        out += '*';
        print_rec(e.kid(1), 3, out);
      });
      return;
    case Kind::Div:
      wrap(2, [&] {
        print_rec(e.kid(0), 2, out);
        out += '/';
        print_rec(e.kid(1), 3, out);
      });
      return;
    case Kind::Pow:
      wrap(4, [&] {
        print_rec(e.kid(0), 5, out);
        out += '^';
        print_rec(e.kid(1), 4, out);
      });
      return;
    default: {
      static const std::map<Kind, std::string> names = {
          {Kind::Sin, "sin"},   {Kind::Cos, "cos"}, {Kind::Tan, "tan"},
          {Kind::Atan, "atan"}, {Kind::Exp, "exp"}, {Kind::Log, "log"},
          {Kind::Sqrt, "sqrt"}};
      out += names.at(e.kind());
      out += '(';
      print_rec(e.kid(0), 0, out);
      out += ')';
      return;
    }
  }
}

}  // namespace detail

/// Grammar-compatible rendering; parse(to_string(e)) reproduces e up to
/// simplification.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_rec(e, 0, out);
  return out;
}

}  // namespace sdesym
