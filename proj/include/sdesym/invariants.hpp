#pragma once

#include <variant>

#include "sdesym/model.hpp"
#include "sdesym/symmetry.hpp"

namespace sdesym {

enum class InvariantKind { Full, Phase, Configurational };

inline const char* to_string(InvariantKind k) {
  switch (k) {
    case InvariantKind::Full: return "full";
    case InvariantKind::Phase: return "phase";
    case InvariantKind::Configurational: return "configurational";
  }
  return "?";
}

/// Configurational if J uses only the x variables, phase if only (x, t),
/// full otherwise.
inline InvariantKind computed_kind(const Expr& J) {
  if (contains(J, VarKind::Wiener)) return InvariantKind::Full;
  if (contains(J, VarKind::Time)) return InvariantKind::Phase;
  return InvariantKind::Configurational;
}

struct InvariantCandidate {
  std::string name;
  Expr J;
  std::optional<InvariantKind> declared_kind;

  InvariantKind kind() const { return computed_kind(J); }

  void validate() const {
    if (declared_kind && *declared_kind != kind())
      throw std::invalid_argument(
          "invariant '" + name + "': declared kind " +
          std::string(to_string(*declared_kind)) +
          " does not match computed kind " + to_string(kind()));
  }
};

/// dJ coefficients on the dynamics; J is a full invariant iff both the dt
/// coefficient and every dw^k coefficient vanish.
inline std::pair<Expr, ExprVec> invariance_residuals(const ItoSDE& sde,
                                                     const Expr& J) {
  return ito_differential(sde, J);
}

/// Residuals for a phase-space function Psi(x,t) (no w dependence): the Ito
/// Laplacian degenerates to (sigma sigma^T)^{ij} Psi_{x^i x^j}.
inline std::pair<Expr, ExprVec> phase_invariant_residuals(const ItoSDE& sde,
                                                          const Expr& Psi) {
  if (contains(Psi, VarKind::Wiener))
    throw std::invalid_argument(
        "phase invariant residuals: Psi depends on a w variable");
  return ito_differential(sde, Psi);
}

/// Application of a vector field to a scalar:
///   X(J) = phi^i J_{x^i} + (R w)^k J_{w^k}.
/// If X is a symmetry and J an invariant of the same system, the result is
/// again an invariant.
inline Expr apply_symmetry_to_invariant(const SimpleVectorField& X,
                                        const Expr& J) {
  Expr g = Expr::number(0.0);
  int n = static_cast<int>(X.phi.size());
  int m = static_cast<int>(X.R.size());
  for (int i = 1; i <= n; ++i)
    g = g + X.phi[i - 1] * diff(J, VarKind::State, i);
  for (int k = 1; k <= m; ++k) {
    Expr rw = Expr::number(0.0);
    for (int l = 1; l <= m; ++l)
      rw = rw + X.R[k - 1][l - 1] * Expr::wiener(l);
    g = g + rw * diff(J, VarKind::Wiener, k);
  }
  return simplify(g);
}

/// Ring operations on invariants: (a F + b G, F G).
inline std::pair<Expr, Expr> ring_combine(const Expr& F, const Expr& G,
                                          double a, double b) {
  return {simplify(a * F + b * G), simplify(F * G)};
}

// ---------------------------------------------------------------------------
// Conditional invariance on level sets.
// ---------------------------------------------------------------------------

/// Project random box points onto {J = c} by damped Newton along grad J.
struct NewtonProjection {
  std::vector<std::array<double, 2>> box;  // per state coordinate
  int max_iter = 50;
  double tol = 1e-12;
};

/// Exact level-set points x_i = p_i(u_1..u_d) for parameters in a box.
struct Parametrization {
  ExprVec point;  // n expressions over u_1..u_d (parsed with state prefix u)
  std::vector<std::array<double, 2>> box;  // per parameter
};

struct LevelSetSpec {
  Expr J;        // configurational or phase function
  double c = 0.0;
  std::variant<NewtonProjection, Parametrization> sampler;
  int count = 64;             // requested on-set samples (>= 30 required)
  double level_tol = 1e-10;   // acceptance |J - c| at samples
  std::uint64_t seed = 0;
};

enum class ConditionalStatus { Conditional, NotConditional };

struct ConditionalVerdict {
  ConditionalStatus status = ConditionalStatus::Conditional;
  bool factored = false;     // residuals symbolically exhibit a (J-c) factor
  int points = 0;
  double max_drift_abs = 0.0;
  double max_diffusion_abs = 0.0;
  std::optional<Binding> witness;
  std::optional<double> witness_value;

  bool pass() const { return status == ConditionalStatus::Conditional; }
};

namespace detail {

inline std::optional<std::vector<double>> newton_project(
    const Expr& J, const ExprVec& gradJ, double c, std::vector<double> x,
    double t, const ConstMap& consts, const NewtonProjection& np) {
  Binding b;
  b.t = t;
  for (int it = 0; it < np.max_iter; ++it) {
    b.x = x;
    double g;
    std::vector<double> grad(x.size());
    try {
      g = eval(J, b, consts) - c;
      for (std::size_t i = 0; i < x.size(); ++i)
        grad[i] = eval(gradJ[i], b, consts);
    } catch (const EvalError&) {
      return std::nullopt;
    }
    if (std::abs(g) <= np.tol) return x;
    double norm2 = 0.0;
    for (double v : grad) norm2 += v * v;
    if (norm2 < 1e-30) return std::nullopt;
    double scale = g / norm2;
    // Damped step: cap the move at half the smallest box width.
    double cap = 0.0;
    for (const auto& r : np.box) {
      double w = 0.5 * (r[1] - r[0]);
      cap = cap == 0.0 ? w : std::min(cap, w);
    }
    double step_len = std::abs(scale) * std::sqrt(norm2);
    double damp = step_len > cap ? cap / step_len : 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= damp * scale * grad[i];
  }
  return std::nullopt;
}

}  // namespace detail

/// Draws level-set points, evaluates both dJ coefficient families at each
/// accepted point, and judges conditional invariance. Additionally attempts
/// to exhibit every residual as (J - c) * remainder by exact polynomial
/// division; a failed factorization attempt is recorded, not fatal.
inline ConditionalVerdict conditional_invariance_check(
    const ItoSDE& sde, const LevelSetSpec& spec, double residual_tol = 1e-8) {
  if (contains(spec.J, VarKind::Wiener))
    throw std::invalid_argument(
        "conditional invariance: J must be configurational or phase");
  if (spec.count < 30)
    throw std::invalid_argument(
        "conditional invariance: need at least 30 level-set samples");
  auto [drift, diffusion] = phase_invariant_residuals(sde, spec.J);

  ConditionalVerdict verdict;

  // Symbolic factor detection via polynomial division.
  auto divisor = as_polynomial(simplify(spec.J - Expr::number(spec.c)));
  if (divisor) {
    bool all = true;
    auto check = [&](const Expr& e) {
      auto p = as_polynomial(substitute_params(e, sde.constants));
      return p && divides(*divisor, *p);
    };
    all = check(drift);
    for (const auto& e : diffusion) all = all && check(e);
    verdict.factored = all;
  }

  Expr drift_c = substitute_params(drift, sde.constants);
  ExprVec diff_c;
  for (const auto& e : diffusion)
    diff_c.push_back(substitute_params(e, sde.constants));
  Expr J_c = substitute_params(spec.J, sde.constants);

  ExprVec grad_c;
  for (int i = 1; i <= sde.n; ++i)
    grad_c.push_back(simplify(diff(J_c, VarKind::State, i)));

  SampleDomain dom = sde.domain();
  const int want = spec.count;
  const std::uint64_t cap = static_cast<std::uint64_t>(want) * 20;
  std::uint64_t draw = 0;
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * rng::uniform_open01(spec.seed ^ 0x5e7u,
                                                rng::kStreamSampler, draw++);
  };

  for (std::uint64_t attempt = 0; attempt < cap && verdict.points < want;
       ++attempt) {
    double t = uniform(dom.t_range[0], dom.t_range[1]);
    std::optional<std::vector<double>> x;
    if (const auto* np = std::get_if<NewtonProjection>(&spec.sampler)) {
      std::vector<double> x0;
      for (const auto& r : np->box) x0.push_back(uniform(r[0], r[1]));
      x = detail::newton_project(J_c, grad_c, spec.c, std::move(x0), t, {},
                                 *np);
    } else {
      const auto& pm = std::get<Parametrization>(spec.sampler);
      Binding ub;
      for (const auto& r : pm.box) ub.x.push_back(uniform(r[0], r[1]));
      ub.t = t;
      std::vector<double> pt;
      bool ok = true;
      for (const auto& pe : pm.point) {
        try {
          pt.push_back(eval(pe, ub, sde.constants));
        } catch (const EvalError&) {
          ok = false;
          break;
        }
      }
      if (ok) x = std::move(pt);
    }
    if (!x) continue;

    Binding b;
    b.t = t;
    b.x = *x;
    b.w.assign(static_cast<std::size_t>(sde.m), 0.0);
    double level;
    try {
      level = eval(J_c, b);
    } catch (const EvalError&) {
      continue;
    }
    if (std::abs(level - spec.c) > spec.level_tol) continue;

    ++verdict.points;
    auto judge = [&](const Expr& e, double& max_abs) {
      double v;
      try {
        v = eval(e, b);
      } catch (const EvalError&) {
        return true;  // singular residual sample: skip this component
      }
      max_abs = std::max(max_abs, std::abs(v));
      if (std::abs(v) > residual_tol) {
        if (verdict.status == ConditionalStatus::Conditional) {
          verdict.witness = b;
          verdict.witness_value = v;
        }
        verdict.status = ConditionalStatus::NotConditional;
        return false;
      }
      return true;
    };
    judge(drift_c, verdict.max_drift_abs);
    for (const auto& e : diff_c) judge(e, verdict.max_diffusion_abs);
    if (verdict.status == ConditionalStatus::NotConditional) return verdict;
  }
  if (verdict.points < want)
    throw std::runtime_error(
        "conditional invariance: sampler produced too few on-set points (" +
        std::to_string(verdict.points) + "/" + std::to_string(want) + ")");
  return verdict;
}

}  // namespace sdesym
