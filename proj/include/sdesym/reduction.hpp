#pragma once

#include "sdesym/model.hpp"

namespace sdesym {

/// Invertible change of state variables y = u(x,t,w), x = v(y,t,w).
/// Both directions are stored over the same internal variable slots; the
/// inverse expressions read their x-variables as y-coordinates.
struct Transform {
  std::string name;
  ExprVec forward;   // y^i = u^i(x, t, w)
  ExprVec inverse;   // x^i = v^i(y, t, w), y parsed into the x slots
  std::optional<SampleDomain> sample_box;  // box for (t, y, w) round trips

  void validate_dims(int n) const {
    if (static_cast<int>(forward.size()) != n ||
        static_cast<int>(inverse.size()) != n)
      throw std::invalid_argument("transform: component count != n");
  }

  /// Max |u(v(y,t,w),t,w) - y| over the sample box (relative to |y|+1).
  double round_trip_error(int n, int m, const ConstMap& consts) const {
    validate_dims(n);
    Substitution sub;
    sub.x.assign(inverse.begin(), inverse.end());
    SampleDomain dom =
        sample_box ? *sample_box : SampleDomain::defaults(n, m);
    double worst = 0.0;
    int valid = 0;
    for (std::uint64_t i = 0; i < 400 && valid < 50; ++i) {
      Binding b = dom.draw(i);
      bool ok = true;
      for (int c = 0; c < n && ok; ++c) {
        try {
          double y = eval(substitute(forward[c], sub), b, consts);
          double err = std::abs(y - b.x[c]) / (std::abs(b.x[c]) + 1.0);
          worst = std::max(worst, err);
        } catch (const EvalError&) {
          ok = false;
        }
      }
      if (ok) ++valid;
    }
    if (valid < 50)
      throw std::runtime_error(
          "transform: too few valid round-trip samples in box");
    return worst;
  }
};

enum class Itoness { ItoSymbolic, ItoNumeric, NotIto };

inline const char* to_string(Itoness s) {
  switch (s) {
    case Itoness::ItoSymbolic: return "ito (symbolic)";
    case Itoness::ItoNumeric: return "ito (numeric)";
    case Itoness::NotIto: return "not-ito";
  }
  return "?";
}

/// Result of pushing a system through a Transform. Coefficients live over
/// (t, y, w) with y occupying the x slots; is_ito records whether every
/// coefficient is w-free (judged by the zero test on its w-derivatives).
struct TransformedSDE {
  ExprVec drift;
  ExprMatrix diffusion;
  Itoness itoness = Itoness::ItoSymbolic;
  ConstMap constants;

  bool is_ito() const { return itoness != Itoness::NotIto; }
};

/// Straightening coordinate for a scalar symmetry phi d/dx: y = int dx/phi,
/// for phi separable as g(t,w) * p(x) with p in the antiderivative pattern
/// table {c, x^k, e^(a x)}. Throws NonSeparableError otherwise.
struct NonSeparableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Expr adapted_coordinate_1d(const Expr& phi) {
  Expr s = simplify(phi);
  detail::Normalizer norm({});
  auto poly = norm.to_poly(s);
  if (poly.size() != 1)
    throw NonSeparableError(
        "adapted coordinate: phi is not a single product term");
  const auto& [mono, coeff] = *poly.begin();
  Expr x = Expr::state(1);
  // Split the monomial into the x-dependent pattern part and the carried
  // (t,w) factor g.
  double x_power = 0.0;
  std::optional<Expr> exp_linear;  // exp(a*x) factor, as (a)
  detail::Mono g_mono;
  for (const auto& [base, ex] : mono) {
    if (!contains(base, VarKind::State, 1)) {
      g_mono.emplace_back(base, ex);
      continue;
    }
    if (base.kind() == Kind::Var) {
      x_power += ex;
      continue;
    }
    if (base.kind() == Kind::Exp && ex == 1.0) {
      // accept only e^(a x + rest) with constant slope a and x-free rest
      Expr a = simplify(diff(base.kid(0), VarKind::State, 1));
      if (!contains(a, VarKind::State) && !contains(a, VarKind::Time) &&
          !contains(a, VarKind::Wiener)) {
        Expr residue = simplify(base.kid(0) - a * x);
        if (!contains(residue, VarKind::State, 1)) {
          if (exp_linear)
            throw NonSeparableError(
                "adapted coordinate: repeated exponential factor");
          exp_linear = a;
          if (!residue.is_number(0.0)) g_mono.emplace_back(exp(residue), 1.0);
          continue;
        }
      }
    }
    throw NonSeparableError("adapted coordinate: factor '" +
                            to_string(base) + "' not in the pattern table");
  }
  if (exp_linear && x_power != 0.0)
    throw NonSeparableError(
        "adapted coordinate: mixed power/exponential x dependence");

  // Antiderivative of 1/p(x).
  Expr anti = Expr::number(0.0);
  if (exp_linear) {
    // p = e^{a x}: int e^{-a x} dx = -e^{-a x}/a
    anti = simplify(-exp(-(*exp_linear) * x) / *exp_linear);
  } else if (x_power == 1.0) {
    anti = log(x);
  } else {
    // p = x^k: int x^{-k} dx = x^{1-k}/(1-k), including k = 0 (constant)
    anti = simplify(pow(x, 1.0 - x_power) / (1.0 - x_power));
  }

  detail::Mono inv_g;
  for (auto [base, ex] : g_mono) inv_g.emplace_back(base, -ex);
  detail::Poly gpoly;
  detail::poly_add_term(gpoly, inv_g, 1.0 / coeff);
  Expr g_inv = norm.from_poly(gpoly);
  return simplify(g_inv * anti);
}

/// Ito-rule change of variables: applies the Ito differential to every
/// forward component, then substitutes x = v(y,t,w). Simplification runs
/// under the positivity assumption (transforms carry a validity domain).
inline TransformedSDE change_variables(const ItoSDE& sde, const Transform& T,
                                       double round_trip_tol = 1e-9,
                                       double zero_tol = kDefaultZeroTol) {
  T.validate_dims(sde.n);
  double rt = T.round_trip_error(sde.n, sde.m, sde.constants);
  if (rt > round_trip_tol)
    throw std::invalid_argument(
        "change of variables: transform round-trip error " +
        std::to_string(rt) + " exceeds tolerance");

  Substitution sub;
  sub.x.assign(T.inverse.begin(), T.inverse.end());
  SimplifyOptions positive{true};

  TransformedSDE out;
  out.constants = sde.constants;
  out.diffusion.assign(static_cast<std::size_t>(sde.n), ExprVec{});
  for (int i = 0; i < sde.n; ++i) {
    auto [drift, diffusion] = ito_differential(sde, T.forward[i]);
    out.drift.push_back(simplify(substitute(drift, sub), positive));
    for (const auto& dk : diffusion)
      out.diffusion[i].push_back(simplify(substitute(dk, sub), positive));
  }

  // Judge w-independence of every coefficient.
  SampleDomain dom = T.sample_box ? *T.sample_box
                                  : SampleDomain::defaults(sde.n, sde.m);
  auto absorb = [&](const Expr& coeff) {
    for (int k = 1; k <= sde.m && out.itoness != Itoness::NotIto; ++k) {
      auto r = is_zero(diff(coeff, VarKind::Wiener, k), dom, zero_tol,
                       sde.constants);
      if (r.status == ZeroStatus::NonZero)
        out.itoness = Itoness::NotIto;
      else if (r.status == ZeroStatus::NumericZero &&
               out.itoness == Itoness::ItoSymbolic)
        out.itoness = Itoness::ItoNumeric;
    }
  };
  for (const auto& e : out.drift) absorb(e);
  for (const auto& row : out.diffusion)
    for (const auto& e : row) absorb(e);
  return out;
}

/// Left-endpoint quadrature of a reconstruction equation on a shared grid:
///   y(t_j) = y0 + sum_{l<j} F_l h + sum_k sum_{l<j} S_{k,l} dW^k_l.
/// The Ito (left-endpoint) convention is the only supported one. The
/// accumulation order matches the Euler-Maruyama update exactly, so
/// discrete identities between the two hold to the last bit.
inline std::vector<double> reconstruct(
    double h, const std::vector<std::vector<double>>& dW,
    const std::vector<double>& drift_integrand,
    const std::vector<std::vector<double>>& dw_integrands, double y0) {
  std::size_t steps = dW.size();
  if (drift_integrand.size() < steps)
    throw std::invalid_argument("reconstruct: drift series/grid mismatch");
  for (const auto& s : dw_integrands)
    if (s.size() < steps)
      throw std::invalid_argument("reconstruct: dw series/grid mismatch");
  std::vector<double> y(steps + 1);
  y[0] = y0;
  for (std::size_t j = 0; j < steps; ++j) {
    double v = y[j];
    v += drift_integrand[j] * h;
    for (std::size_t k = 0; k < dw_integrands.size(); ++k)
      v += dw_integrands[k][j] * dW[j][k];
    y[j + 1] = v;
  }
  return y;
}

}  // namespace sdesym
