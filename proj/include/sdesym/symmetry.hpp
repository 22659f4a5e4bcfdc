#pragma once

#include <string>

#include "sdesym/model.hpp"

namespace sdesym {

using RealMatrix = std::vector<std::vector<double>>;

enum class FieldClass { Deterministic, Random, W };

inline const char* to_string(FieldClass c) {
  switch (c) {
    case FieldClass::Deterministic: return "deterministic";
    case FieldClass::Random: return "random";
    case FieldClass::W: return "W";
  }
  return "?";
}

/// Simple admissible vector field
///   X = phi^i(x,t,w) d/dx^i + (R w)^k d/dw^k
/// with no time component. R must lie in the conformal-linear Lie algebra,
/// i.e. R = lambda I + S with S skew-symmetric.
struct SimpleVectorField {
  std::string name;
  ExprVec phi;   // length n
  RealMatrix R;  // m x m

  void validate(double tol = 1e-12) const {
    if (phi.empty()) throw std::invalid_argument("vector field: empty phi");
    std::size_t m = R.size();
    if (m == 0) throw std::invalid_argument("vector field: empty R");
    for (const auto& row : R)
      if (row.size() != m)
        throw std::invalid_argument("vector field: R not square");
    double lambda = 0.0;
    for (std::size_t k = 0; k < m; ++k) lambda += R[k][k];
    lambda /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double sym = R[i][j] + R[j][i];
        double want = i == j ? 2.0 * lambda : 0.0;
        if (std::abs(sym - want) > tol)
          throw std::invalid_argument(
              "vector field: R is not in the conformal-linear algebra "
              "(R + R^T != 2*lambda*I)");
      }
  }

  bool r_is_zero(double tol = 0.0) const {
    for (const auto& row : R)
      for (double v : row)
        if (std::abs(v) > tol) return false;
    return true;
  }
};

inline SimpleVectorField zero_field(int n, int m) {
  SimpleVectorField z;
  z.name = "zero";
  z.phi.assign(static_cast<std::size_t>(n), Expr::number(0.0));
  z.R.assign(static_cast<std::size_t>(m),
             std::vector<double>(static_cast<std::size_t>(m), 0.0));
  return z;
}

/// W if R != 0; else random if any phi^i references a w variable; else
/// deterministic.
inline FieldClass classify(const SimpleVectorField& X) {
  if (!X.r_is_zero()) return FieldClass::W;
  for (const auto& p : X.phi)
    if (contains(p, VarKind::Wiener)) return FieldClass::Random;
  return FieldClass::Deterministic;
}

/// Residuals of the determining equations for simple symmetries of an Ito
/// system:
///   drift_i    = phi^i_t + f^j phi^i_{x^j} - phi^j f^i_{x^j}
///                + Delta phi^i / 2
///   diffusion_{ik} = phi^i_{w^k} + sigma^j_k phi^i_{x^j}
///                    - phi^j (sigma^i_k)_{x^j} - sigma^i_m R^m_k
/// X is a symmetry iff every residual vanishes. The residuals are returned
/// simplified but unjudged; judging is a separate zero-test step.
struct DeterminingResiduals {
  ExprVec drift;        // n entries
  ExprMatrix diffusion; // n x m
};

inline DeterminingResiduals determining_residuals_ito(
    const ItoSDE& sde, const SimpleVectorField& X) {
  if (static_cast<int>(X.phi.size()) != sde.n ||
      static_cast<int>(X.R.size()) != sde.m)
    throw std::invalid_argument("determining residuals: dimension mismatch");
  DeterminingResiduals out;
  for (int i = 1; i <= sde.n; ++i) {
    Expr r = diff(X.phi[i - 1], VarKind::Time);
    for (int j = 1; j <= sde.n; ++j)
      r = r + sde.f[j - 1] * diff(X.phi[i - 1], VarKind::State, j) -
          X.phi[j - 1] * diff(sde.f[i - 1], VarKind::State, j);
    r = r + 0.5 * ito_laplacian(sde, X.phi[i - 1]);
    out.drift.push_back(simplify(r));
  }
  out.diffusion.assign(static_cast<std::size_t>(sde.n), ExprVec{});
  for (int i = 1; i <= sde.n; ++i)
    for (int k = 1; k <= sde.m; ++k) {
      Expr r = diff(X.phi[i - 1], VarKind::Wiener, k);
      for (int j = 1; j <= sde.n; ++j)
        r = r + sde.sigma[j - 1][k - 1] * diff(X.phi[i - 1], VarKind::State, j) -
            X.phi[j - 1] * diff(sde.sigma[i - 1][k - 1], VarKind::State, j);
      for (int mm = 1; mm <= sde.m; ++mm)
        r = r - sde.sigma[i - 1][mm - 1] * X.R[mm - 1][k - 1];
      out.diffusion[i - 1].push_back(simplify(r));
    }
  return out;
}

/// Stratonovich determining residuals: the drift family loses the Ito
/// Laplacian term; the diffusion family coincides with the Ito one.
inline DeterminingResiduals determining_residuals_strat(
    const StratSDE& ssde, const SimpleVectorField& X) {
  if (static_cast<int>(X.phi.size()) != ssde.n ||
      static_cast<int>(X.R.size()) != ssde.m)
    throw std::invalid_argument("determining residuals: dimension mismatch");
  DeterminingResiduals out;
  for (int i = 1; i <= ssde.n; ++i) {
    Expr r = diff(X.phi[i - 1], VarKind::Time);
    for (int j = 1; j <= ssde.n; ++j)
      r = r + ssde.b[j - 1] * diff(X.phi[i - 1], VarKind::State, j) -
          X.phi[j - 1] * diff(ssde.b[i - 1], VarKind::State, j);
    out.drift.push_back(simplify(r));
  }
  out.diffusion.assign(static_cast<std::size_t>(ssde.n), ExprVec{});
  for (int i = 1; i <= ssde.n; ++i)
    for (int k = 1; k <= ssde.m; ++k) {
      Expr r = diff(X.phi[i - 1], VarKind::Wiener, k);
      for (int j = 1; j <= ssde.n; ++j)
        r = r +
            ssde.sigma[j - 1][k - 1] * diff(X.phi[i - 1], VarKind::State, j) -
            X.phi[j - 1] * diff(ssde.sigma[i - 1][k - 1], VarKind::State, j);
      for (int mm = 1; mm <= ssde.m; ++mm)
        r = r - ssde.sigma[i - 1][mm - 1] * X.R[mm - 1][k - 1];
      out.diffusion[i - 1].push_back(simplify(r));
    }
  return out;
}

/// sigma = 0 specialization: residual_i = phi^i_t + f^j phi^i_{x^j}
/// - phi^j f^i_{x^j}, for deterministic systems dx/dt = f(x,t).
inline ExprVec deterministic_ds_residual(const ExprVec& f,
                                         const SimpleVectorField& X) {
  if (f.size() != X.phi.size())
    throw std::invalid_argument("deterministic residual: dimension mismatch");
  if (!X.r_is_zero())
    throw std::invalid_argument("deterministic residual: R must be zero");
  for (const auto& p : X.phi)
    if (contains(p, VarKind::Wiener))
      throw std::invalid_argument(
          "deterministic residual: phi depends on a w variable");
  for (const auto& e : f)
    if (contains(e, VarKind::Wiener))
      throw std::invalid_argument(
          "deterministic residual: drift depends on a w variable");
  int n = static_cast<int>(f.size());
  ExprVec out;
  for (int i = 1; i <= n; ++i) {
    Expr r = diff(X.phi[i - 1], VarKind::Time);
    for (int j = 1; j <= n; ++j)
      r = r + f[j - 1] * diff(X.phi[i - 1], VarKind::State, j) -
          X.phi[j - 1] * diff(f[i - 1], VarKind::State, j);
    out.push_back(simplify(r));
  }
  return out;
}

/// Lie bracket [X, Y]. The spatial part is X(psi^i) - Y(phi^i) with each
/// field acting as phi^j d_{x^j} + (R w)^k d_{w^k}; the w-action matrix is
/// R_Y R_X - R_X R_Y (skew, so the result stays in the admissible class).
inline SimpleVectorField commutator(const SimpleVectorField& X,
                                    const SimpleVectorField& Y) {
  if (X.phi.size() != Y.phi.size() || X.R.size() != Y.R.size())
    throw std::invalid_argument("commutator: context mismatch");
  int n = static_cast<int>(X.phi.size());
  int m = static_cast<int>(X.R.size());
  auto apply = [&](const SimpleVectorField& A, const Expr& g) {
    Expr r = Expr::number(0.0);
    for (int j = 1; j <= n; ++j)
      r = r + A.phi[j - 1] * diff(g, VarKind::State, j);
    for (int k = 1; k <= m; ++k) {
      Expr rw = Expr::number(0.0);
      for (int l = 1; l <= m; ++l)
        rw = rw + A.R[k - 1][l - 1] * Expr::wiener(l);
      r = r + rw * diff(g, VarKind::Wiener, k);
    }
    return r;
  };
  SimpleVectorField Z;
  Z.name = "[" + X.name + "," + Y.name + "]";
  for (int i = 0; i < n; ++i)
    Z.phi.push_back(simplify(apply(X, Y.phi[i]) - apply(Y, X.phi[i])));
  Z.R.assign(static_cast<std::size_t>(m),
             std::vector<double>(static_cast<std::size_t>(m), 0.0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double v = 0.0;
      for (int k = 0; k < m; ++k)
        v += Y.R[i][k] * X.R[k][j] - X.R[i][k] * Y.R[k][j];
      Z.R[i][j] = v;
    }
  return Z;
}

/// F X + G Y for invariants F, G and deterministic/random symmetries X, Y
/// (the Lie-module combination; requires R = 0 on both fields).
inline SimpleVectorField lie_module_combine(const Expr& F,
                                            const SimpleVectorField& X,
                                            const Expr& G,
                                            const SimpleVectorField& Y) {
  if (!X.r_is_zero() || !Y.r_is_zero())
    throw std::invalid_argument(
        "lie module combine: fields must have R = 0");
  if (X.phi.size() != Y.phi.size())
    throw std::invalid_argument("lie module combine: context mismatch");
  SimpleVectorField Z;
  Z.name = "module-combination";
  for (std::size_t i = 0; i < X.phi.size(); ++i)
    Z.phi.push_back(simplify(F * X.phi[i] + G * Y.phi[i]));
  Z.R = X.R;
  return Z;
}

/// Aggregate verdict for one residual family (all components judged by the
/// tri-state zero test and folded together).
struct FamilyVerdict {
  ZeroStatus status = ZeroStatus::SymbolicZero;
  double max_abs = 0.0;
  std::optional<Binding> witness;
  std::optional<double> witness_value;

  void absorb(const ZeroResult& r) {
    max_abs = std::max(max_abs, r.max_abs);
    if (r.status == ZeroStatus::NonZero) {
      if (status != ZeroStatus::NonZero) {
        witness = r.witness;
        witness_value = r.witness_value;
      }
      status = ZeroStatus::NonZero;
    } else if (r.status == ZeroStatus::NumericZero &&
               status == ZeroStatus::SymbolicZero) {
      status = ZeroStatus::NumericZero;
    }
  }
};

struct SymmetryVerdict {
  FamilyVerdict drift;
  FamilyVerdict diffusion;
  FieldClass classification = FieldClass::Deterministic;

  bool pass() const {
    return drift.status != ZeroStatus::NonZero &&
           diffusion.status != ZeroStatus::NonZero;
  }
  double max_abs() const { return std::max(drift.max_abs, diffusion.max_abs); }
};

/// Computes the determining residuals of X for sde and judges every
/// component with the zero test over the given sampling domain.
inline SymmetryVerdict check_symmetry(const ItoSDE& sde,
                                      const SimpleVectorField& X,
                                      const SampleDomain& domain,
                                      double tol = kDefaultZeroTol) {
  X.validate();
  auto res = determining_residuals_ito(sde, X);
  SymmetryVerdict v;
  v.classification = classify(X);
  for (const auto& e : res.drift)
    v.drift.absorb(is_zero(e, domain, tol, sde.constants));
  for (const auto& row : res.diffusion)
    for (const auto& e : row)
      v.diffusion.absorb(is_zero(e, domain, tol, sde.constants));
  return v;
}

inline SymmetryVerdict check_symmetry(const ItoSDE& sde,
                                      const SimpleVectorField& X,
                                      double tol = kDefaultZeroTol) {
  return check_symmetry(sde, X, sde.domain(), tol);
}

/// Stratonovich-side analogue of check_symmetry.
inline SymmetryVerdict check_symmetry_strat(const StratSDE& ssde,
                                            const SimpleVectorField& X,
                                            const SampleDomain& domain,
                                            double tol = kDefaultZeroTol) {
  X.validate();
  auto res = determining_residuals_strat(ssde, X);
  SymmetryVerdict v;
  v.classification = classify(X);
  for (const auto& e : res.drift)
    v.drift.absorb(is_zero(e, domain, tol, ssde.constants));
  for (const auto& row : res.diffusion)
    for (const auto& e : row)
      v.diffusion.absorb(is_zero(e, domain, tol, ssde.constants));
  return v;
}

}  // namespace sdesym
