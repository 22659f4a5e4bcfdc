#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "sdesym/expr.hpp"
#include "sdesym/rng.hpp"

namespace sdesym {

struct SimplifyOptions {
  /// Allow rewrites valid only on positive arguments: exp(log(u)) -> u,
  /// log(u^c) -> c*log(u), and distributing non-integer powers over
  /// products. Off by default; change-of-variable code enables it because
  /// transforms come with a validity domain.
  bool assume_positive = false;
};

namespace detail {

// ---------------------------------------------------------------------------
// Sum-of-products normal form.
//
// A Poly is a sum of terms; a term is a double coefficient times a Mono,
// which is a sorted list of (atomic base, double exponent) factors. Atomic
// bases are themselves simplified expressions that are not sums, products,
// numeric powers, or negations (variables, named constants, function
// applications, reciprocal sums, symbolic powers).
// ---------------------------------------------------------------------------

struct MonoLess;
using Mono = std::vector<std::pair<Expr, double>>;

inline int mono_compare(const Mono& a, const Mono& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(a[i].first, b[i].first);
    if (c != 0) return c;
    if (a[i].second != b[i].second) return a[i].second < b[i].second ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const {
    return mono_compare(a, b) < 0;
  }
};

using Poly = std::map<Mono, double, MonoLess>;

inline Poly poly_const(double c) {
  Poly p;
  if (c != 0.0) p[{}] = c;
  return p;
}

inline void poly_add_term(Poly& p, const Mono& m, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = p.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) p.erase(it);
  }
}

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b) poly_add_term(r, m, c);
  return r;
}

inline Poly poly_scale(Poly p, double s) {
  if (s == 0.0) return {};
  for (auto& [m, c] : p) c *= s;
  return p;
}

class Normalizer {
 public:
  explicit Normalizer(const SimplifyOptions& opts) : opts_(opts) {}

  Expr simplify(const Expr& e) { return from_poly(to_poly(e)); }

  Poly to_poly(const Expr& e) {
    switch (e.kind()) {
      case Kind::Number:
        return poly_const(e.number_value());
      case Kind::Param:
      case Kind::Var:
        return atom_poly(e, 1.0);
      case Kind::Neg:
        return poly_scale(to_poly(e.kid(0)), -1.0);
      case Kind::Add:
        return poly_add(to_poly(e.kid(0)), to_poly(e.kid(1)));
      case Kind::Sub:
        return poly_add(to_poly(e.kid(0)),
                        poly_scale(to_poly(e.kid(1)), -1.0));
      case Kind::Mul:
        return poly_mul(to_poly(e.kid(0)), to_poly(e.kid(1)));
      case Kind::Div:
        return poly_mul(to_poly(e.kid(0)), poly_reciprocal(to_poly(e.kid(1))));
      case Kind::Pow:
        return pow_poly(e.kid(0), e.kid(1));
      case Kind::Sqrt:
        return pow_poly(e.kid(0), Expr::number(0.5));
      default:
        return function_poly(e.kind(), e.kid(0));
    }
  }

  Expr from_poly(const Poly& p) {
    if (p.empty()) return Expr::number(0.0);
    std::optional<Expr> sum;
    for (const auto& [m, c] : p) {
      Expr term = term_expr(m, c);
      if (!sum) {
        sum = term;
      } else if (c < 0.0) {
        sum = Expr::make(Kind::Sub, {*sum, term_expr(m, -c)});
      } else {
        sum = Expr::make(Kind::Add, {*sum, term});
      }
    }
    return *sum;
  }

 private:
  SimplifyOptions opts_;

  static Poly atom_poly(const Expr& base, double exponent) {
    if (exponent == 0.0) return poly_const(1.0);
    Poly p;
    p[Mono{{base, exponent}}] = 1.0;
    return p;
  }

  Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a)
      for (const auto& [mb, cb] : b)
        add_mono(r, mono_mul(ma, mb), ca * cb);
    return r;
  }

  // Insert a term, re-expanding any sum factor that exponent merging left
  // with a small positive integral power (so the normal form stays flat).
  void add_mono(Poly& p, const Mono& m, double c) {
    if (c == 0.0) return;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto& [base, ex] = m[i];
      bool sumlike = base.kind() == Kind::Add || base.kind() == Kind::Sub ||
                     base.kind() == Kind::Neg || base.kind() == Kind::Number;
      if (sumlike && ex == std::rint(ex) && ex >= 1.0 && ex <= 8.0) {
        Mono rest = m;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
        Poly pb = to_poly(base);
        Poly pk = pb;
        for (int r = 1; r < static_cast<int>(ex); ++r) pk = poly_mul(pk, pb);
        for (const auto& [mm, cc] : pk)
          add_mono(p, mono_mul(mm, rest), cc * c);
        return;
      }
    }
    poly_add_term(p, m, c);
  }

  Mono mono_mul(const Mono& a, const Mono& b) {
    Mono merged;
    merged.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      int c = i == a.size()   ? 1
              : j == b.size() ? -1
                              : compare(a[i].first, b[j].first);
      if (c < 0) {
        merged.push_back(a[i++]);
      } else if (c > 0) {
        merged.push_back(b[j++]);
      } else {
        double ex = a[i].second + b[j].second;
        if (ex != 0.0) merged.emplace_back(a[i].first, ex);
        ++i;
        ++j;
      }
    }
    return canonicalize_mono(std::move(merged));
  }

  // Merge exponential factors: exp(u)^a * exp(v)^b -> exp(a*u + b*v).
  Mono canonicalize_mono(Mono m) {
    Poly exp_arg;
    bool have_exp = false;
    Mono rest;
    for (auto& [base, ex] : m) {
      if (base.kind() == Kind::Exp) {
        exp_arg = poly_add(exp_arg, poly_scale(to_poly(base.kid(0)), ex));
        have_exp = true;
      } else {
        rest.emplace_back(base, ex);
      }
    }
    if (!have_exp) return m;
    if (!exp_arg.empty()) {
      Expr merged = Expr::make(Kind::Exp, {from_poly(exp_arg)});
      rest.emplace_back(merged, 1.0);
      std::sort(rest.begin(), rest.end(), [](const auto& x, const auto& y) {
        return compare(x.first, y.first) < 0;
      });
    }
    return rest;
  }

  Poly poly_reciprocal(const Poly& p) {
    if (p.empty())
      return atom_poly(Expr::make(Kind::Div, {Expr::number(1.0),
                                              Expr::number(0.0)}),
                       1.0);  // division by symbolic zero; caught at eval
    if (p.size() == 1) {
      const auto& [m, c] = *p.begin();
      Mono inv = m;
      for (auto& [base, ex] : inv) ex = -ex;
      Poly r;
      add_mono(r, canonicalize_mono(std::move(inv)), 1.0 / c);
      return r;
    }
    return atom_poly(from_poly(p), -1.0);
  }

  Poly pow_poly(const Expr& base_raw, const Expr& expo_raw) {
    Expr expo = simplify(expo_raw);
    if (!expo.is_number()) {
      Expr base = simplify(base_raw);
      if (base.is_number(1.0)) return poly_const(1.0);
      return atom_poly(Expr::make(Kind::Pow, {base, expo}), 1.0);
    }
    double k = expo.number_value();
    if (k == 0.0) return poly_const(1.0);  // 0^0 := 1 by convention
    Poly pb = to_poly(base_raw);
    if (k == 1.0) return pb;
    if (pb.empty()) return {};  // 0^k, k != 0 (k < 0 is singular anyway)
    bool integral = k == std::rint(k) && std::abs(k) < 1e9;
    if (pb.size() == 1) {
      const auto& [m, c] = *pb.begin();
      // (c * prod b_i^e_i)^k: safe when k is integral, or when the base
      // coefficient is positive and bases are assumed positive.
      if (integral || opts_.assume_positive || m.empty()) {
        if (c < 0.0 && !integral)
          return atom_poly(Expr::make(Kind::Pow,
                                      {from_poly(pb), Expr::number(k)}),
                           1.0);
        double ck = std::pow(c, k);
        if (!std::isfinite(ck))
          return atom_poly(Expr::make(Kind::Pow,
                                      {from_poly(pb), Expr::number(k)}),
                           1.0);
        Mono mk = m;
        for (auto& [b, ex] : mk) ex *= k;
        Poly r;
        add_mono(r, canonicalize_mono(std::move(mk)), ck);
        return r;
      }
      if (m.size() == 1 && m[0].second == 1.0 && c == 1.0)
        return atom_poly(m[0].first, k);
      return atom_poly(Expr::make(Kind::Pow, {from_poly(pb), Expr::number(k)}),
                       1.0);
    }
    if (integral && k >= 2.0 && k <= 8.0) {
      Poly r = pb;
      for (int i = 1; i < static_cast<int>(k); ++i) r = poly_mul(r, pb);
      return r;
    }
    // Multi-term base: keep the sum as an atomic mono factor with the
    // exponent in the mono (matching poly_reciprocal), so repeated
    // normalization is stable and exponents merge.
    return atom_poly(from_poly(pb), k);
  }

  Poly function_poly(Kind kind, const Expr& arg_raw) {
    Expr arg = simplify(arg_raw);
    if (arg.is_number()) {
      double v = arg.number_value();
      double folded;
      bool ok = true;
      switch (kind) {
        case Kind::Sin: folded = std::sin(v); break;
        case Kind::Cos: folded = std::cos(v); break;
        case Kind::Tan: folded = std::tan(v); break;
        case Kind::Atan: folded = std::atan(v); break;
        case Kind::Exp: folded = std::exp(v); break;
        case Kind::Log:
          ok = v > 0.0;
          folded = ok ? std::log(v) : 0.0;
          break;
        default: ok = false; folded = 0.0; break;
      }
      if (ok && std::isfinite(folded)) return poly_const(folded);
    }
    if (kind == Kind::Log) {
      if (arg.kind() == Kind::Exp) return to_poly(arg.kid(0));
      if (opts_.assume_positive && arg.kind() == Kind::Pow &&
          arg.kid(1).is_number())
        return poly_mul(poly_const(arg.kid(1).number_value()),
                        function_poly(Kind::Log, arg.kid(0)));
    }
    if (kind == Kind::Exp) {
      // exp(sum c_i log(u_i) + rest) -> prod u_i^{c_i} * exp(rest),
      // valid under the positivity assumption.
      if (opts_.assume_positive) {
        Poly parg = to_poly(arg);
        Poly rest;
        Poly result = poly_const(1.0);
        bool rewrote = false;
        for (const auto& [m, c] : parg) {
          if (m.size() == 1 && m[0].first.kind() == Kind::Log &&
              m[0].second == 1.0) {
            result = poly_mul(result,
                              pow_poly(m[0].first.kid(0), Expr::number(c)));
            rewrote = true;
          } else {
            poly_add_term(rest, m, c);
          }
        }
        if (rewrote) {
          if (!rest.empty())
            result = poly_mul(
                result, atom_poly(Expr::make(Kind::Exp, {from_poly(rest)}),
                                  1.0));
          return result;
        }
      }
      if (arg.is_number(0.0)) return poly_const(1.0);
    }
    return atom_poly(Expr::make(kind, {arg}), 1.0);
  }

  Expr term_expr(const Mono& m, double coeff) {
    if (m.empty()) return Expr::number(coeff);
    double mag = std::abs(coeff);
    std::optional<Expr> prod;
    auto append = [&](const Expr& f) {
      prod = prod ? Expr::make(Kind::Mul, {*prod, f}) : f;
    };
    if (mag != 1.0) append(Expr::number(mag));
    for (const auto& [base, ex] : m) {
      if (ex == 1.0)
        append(base);
      else
        append(Expr::make(Kind::Pow, {base, Expr::number(ex)}));
    }
    if (coeff < 0.0) return Expr::make(Kind::Neg, {*prod});
    return *prod;
  }
};

}  // namespace detail

/// Rule-based simplification over a flat sum-of-products normal form:
/// constant folding, 0/1 identities, like-term collection, power and
/// exponential merging. Idempotent; sound at every non-singular binding.
inline Expr simplify(const Expr& e, const SimplifyOptions& opts = {}) {
  return detail::Normalizer(opts).simplify(e);
}

inline ExprVec simplify_all(const ExprVec& v, const SimplifyOptions& opts = {}) {
  ExprVec out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(simplify(e, opts));
  return out;
}

// ---------------------------------------------------------------------------
// Pure polynomial view (for conditional-invariant factor detection).
// ---------------------------------------------------------------------------

/// A polynomial over "atoms" (variables and named constants) with
/// non-negative integer exponents and double coefficients.
struct Polynomial {
  std::vector<Expr> atoms;                       // sorted, unique
  std::map<std::vector<int>, double> terms;      // exponent row -> coeff
};

namespace detail {

inline std::optional<Polynomial> poly_to_pure(const Poly& p) {
  Polynomial out;
  for (const auto& [m, c] : p)
    for (const auto& [base, ex] : m) {
      if (base.kind() != Kind::Var && base.kind() != Kind::Param)
        return std::nullopt;
      if (ex != std::rint(ex) || ex < 1.0 || ex > 64.0) return std::nullopt;
      auto it = std::lower_bound(
          out.atoms.begin(), out.atoms.end(), base,
          [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
      if (it == out.atoms.end() || compare(*it, base) != 0)
        out.atoms.insert(it, base);
    }
  for (const auto& [m, c] : p) {
    std::vector<int> row(out.atoms.size(), 0);
    for (const auto& [base, ex] : m) {
      auto it = std::lower_bound(
          out.atoms.begin(), out.atoms.end(), base,
          [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
      row[static_cast<std::size_t>(it - out.atoms.begin())] =
          static_cast<int>(ex);
    }
    out.terms[row] += c;
  }
  return out;
}

}  // namespace detail

/// Converts to the pure polynomial view, or nullopt when e is not a
/// polynomial in its variables and constants.
inline std::optional<Polynomial> as_polynomial(const Expr& e) {
  detail::Normalizer norm({});
  return detail::poly_to_pure(norm.to_poly(e));
}

/// Exact multivariate division test: true iff value = divisor * quotient
/// with zero remainder (single-divisor reduction; a single polynomial is a
/// Groebner basis of the ideal it generates, so the remainder is canonical).
inline bool divides(const Polynomial& divisor, const Polynomial& value,
                    double coeff_tol = 1e-12) {
  if (value.terms.empty()) return true;
  if (divisor.terms.empty()) return false;
  // Align atom lists.
  std::vector<Expr> atoms = value.atoms;
  for (const auto& a : divisor.atoms) {
    auto it = std::lower_bound(
        atoms.begin(), atoms.end(), a,
        [](const Expr& x, const Expr& y) { return compare(x, y) < 0; });
    if (it == atoms.end() || compare(*it, a) != 0) atoms.insert(it, a);
  }
  auto lift = [&](const Polynomial& p) {
    std::map<std::vector<int>, double> t;
    for (const auto& [row, c] : p.terms) {
      std::vector<int> r(atoms.size(), 0);
      for (std::size_t i = 0; i < p.atoms.size(); ++i) {
        auto it = std::lower_bound(
            atoms.begin(), atoms.end(), p.atoms[i],
            [](const Expr& x, const Expr& y) { return compare(x, y) < 0; });
        r[static_cast<std::size_t>(it - atoms.begin())] = row[i];
      }
      t[r] += c;
    }
    return t;
  };
  auto rem = lift(value);
  auto div = lift(divisor);
  double scale = 0.0;
  for (const auto& [row, c] : rem) scale = std::max(scale, std::abs(c));
  // Graded-lex leading term (map iteration order is lex; track degree too).
  auto leading = [](const std::map<std::vector<int>, double>& t) {
    auto best = t.end();
    int best_deg = -1;
    for (auto it = t.begin(); it != t.end(); ++it) {
      int deg = 0;
      for (int e : it->first) deg += e;
      if (deg > best_deg) {
        best_deg = deg;
        best = it;
      } else if (deg == best_deg && best != t.end() &&
                 it->first > best->first) {
        best = it;
      }
    }
    return best;
  };
  auto dl = leading(div);
  for (int guard = 0; guard < 100000 && !rem.empty(); ++guard) {
    // Drop numerically negligible residue.
    for (auto it = rem.begin(); it != rem.end();) {
      if (std::abs(it->second) <= coeff_tol * scale)
        it = rem.erase(it);
      else
        ++it;
    }
    if (rem.empty()) return true;
    auto rl = leading(rem);
    std::vector<int> q(rl->first.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = rl->first[i] - dl->first[i];
      if (q[i] < 0) return false;  // leading term not reducible
    }
    double qc = rl->second / dl->second;
    for (const auto& [row, c] : div) {
      std::vector<int> r(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) r[i] = row[i] + q[i];
      auto [it, inserted] = rem.emplace(r, -qc * c);
      if (!inserted) {
        it->second -= qc * c;
        if (it->second == 0.0) rem.erase(it);
      }
    }
  }
  return rem.empty();
}

// ---------------------------------------------------------------------------
// Tri-state zero testing.
// ---------------------------------------------------------------------------

/// Sampling box for (t, x, w) used by the numeric zero test.
struct SampleDomain {
  std::array<double, 2> t_range{0.1, 2.0};
  std::vector<std::array<double, 2>> x_ranges;
  std::vector<std::array<double, 2>> w_ranges;
  int samples = 200;
  std::uint64_t seed = 0;

  static SampleDomain defaults(int n, int m) {
    SampleDomain d;
    d.x_ranges.assign(static_cast<std::size_t>(n), {0.2, 2.0});
    d.w_ranges.assign(static_cast<std::size_t>(m), {-1.0, 1.0});
    return d;
  }

  Binding draw(std::uint64_t sample_index) const {
    Binding b;
    std::uint64_t d = sample_index * (1 + x_ranges.size() + w_ranges.size());
    auto u = [&] {
      return rng::uniform_open01(seed, rng::kStreamSampler, d++);
    };
    b.t = t_range[0] + (t_range[1] - t_range[0]) * u();
    for (const auto& r : x_ranges) b.x.push_back(r[0] + (r[1] - r[0]) * u());
    for (const auto& r : w_ranges) b.w.push_back(r[0] + (r[1] - r[0]) * u());
    return b;
  }
};

enum class ZeroStatus { SymbolicZero, NumericZero, NonZero };

inline const char* to_string(ZeroStatus s) {
  switch (s) {
    case ZeroStatus::SymbolicZero: return "symbolic-zero";
    case ZeroStatus::NumericZero: return "numeric-zero";
    case ZeroStatus::NonZero: return "non-zero";
  }
  return "?";
}

/// Zero-test outcome. NumericZero is tolerance-relative evidence, not a
/// proof; NonZero carries the first witness binding for reproducibility.
struct ZeroResult {
  ZeroStatus status = ZeroStatus::SymbolicZero;
  double max_abs = 0.0;
  std::optional<Binding> witness;
  std::optional<double> witness_value;

  bool passes() const { return status != ZeroStatus::NonZero; }
};

/// Tri-state zero test: symbolic (simplifies to the 0 constant), else
/// numeric over the sample box, else NonZero with a witness. Samples with
/// domain violations are skipped and redrawn up to a retry cap.
inline ZeroResult is_zero(const Expr& e, const SampleDomain& domain,
                          double tol, const ConstMap& consts = {}) {
  ZeroResult res;
  Expr s = simplify(e);
  if (s.is_number(0.0)) {
    res.status = ZeroStatus::SymbolicZero;
    return res;
  }
  Expr compiled = substitute_params(s, consts);
  int valid = 0;
  const int want = domain.samples;
  const std::uint64_t cap = static_cast<std::uint64_t>(want) * 10;
  for (std::uint64_t i = 0; i < cap && valid < want; ++i) {
    Binding b = domain.draw(i);
    double v;
    try {
      v = eval(compiled, b);
    } catch (const EvalError&) {
      continue;  // singular sample; redraw
    }
    if (!std::isfinite(v)) continue;
    ++valid;
    res.max_abs = std::max(res.max_abs, std::abs(v));
    if (std::abs(v) > tol) {
      res.status = ZeroStatus::NonZero;
      res.witness = b;
      res.witness_value = v;
      return res;
    }
  }
  if (valid < want)
    throw std::runtime_error(
        "zero test: too few valid samples in the domain box (" +
        std::to_string(valid) + "/" + std::to_string(want) + ")");
  res.status = ZeroStatus::NumericZero;
  return res;
}

/// Default tolerance for the numeric zero verdict.
inline constexpr double kDefaultZeroTol = 1e-9;

}  // namespace sdesym
