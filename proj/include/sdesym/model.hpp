#pragma once

#include <string>
#include <utility>

#include "sdesym/expr.hpp"
#include "sdesym/simplify.hpp"

namespace sdesym {

/// System dx^i = f^i(x,t) dt + sigma^i_k(x,t) dw^k with n state variables
/// driven by m independent Wiener processes. Coefficients may reference
/// named constants; they must not reference the w variables.
struct ItoSDE {
  std::string name;
  int n = 0;
  int m = 0;
  ExprVec f;          // length n
  ExprMatrix sigma;   // n rows of m entries
  ConstMap constants;
  std::vector<std::string> var_names;  // optional display names
  std::optional<SampleDomain> sample_box;
  std::string notes;

  void validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("model: need n,m >= 1");
    if (static_cast<int>(f.size()) != n)
      throw std::invalid_argument("model: drift length != n");
    if (static_cast<int>(sigma.size()) != n)
      throw std::invalid_argument("model: diffusion row count != n");
    for (const auto& row : sigma)
      if (static_cast<int>(row.size()) != m)
        throw std::invalid_argument("model: diffusion row length != m");
    for (const auto& e : f)
      if (contains(e, VarKind::Wiener))
        throw std::invalid_argument("model: drift depends on a w variable");
    for (const auto& row : sigma)
      for (const auto& e : row)
        if (contains(e, VarKind::Wiener))
          throw std::invalid_argument(
              "model: diffusion depends on a w variable");
  }

  SampleDomain domain() const {
    return sample_box ? *sample_box : SampleDomain::defaults(n, m);
  }
};

/// Stratonovich form dx^i = b^i dt + sigma^i_k o dw^k of a system.
struct StratSDE {
  std::string name;
  int n = 0;
  int m = 0;
  ExprVec b;
  ExprMatrix sigma;
  ConstMap constants;
  std::vector<std::string> var_names;
  std::optional<SampleDomain> sample_box;
  std::string notes;

  SampleDomain domain() const {
    return sample_box ? *sample_box : SampleDomain::defaults(n, m);
  }
};

/// Coefficients of the diffusion equation u_t = A^{ij} u_{ij} - B^i u_i - C u
/// associated with an Ito system.
struct FPCoefficients {
  ExprMatrix A;  // n x n, symmetric
  ExprVec B;     // n
  Expr C;
};

namespace detail {

inline Expr sigma_sigma_t(const ItoSDE& sde, int i, int j) {
  Expr s = Expr::number(0.0);
  for (int k = 1; k <= sde.m; ++k)
    s = s + sde.sigma[i - 1][k - 1] * sde.sigma[j - 1][k - 1];
  return s;
}

}  // namespace detail

/// Ito Laplacian of F(x,t,w):
///   Delta F = sum_k F_{w^k w^k} + (sigma sigma^T)^{ij} F_{x^i x^j}
///             + 2 sigma^j_k F_{x^j w^k}.
inline Expr ito_laplacian(const ItoSDE& sde, const Expr& F) {
  Expr acc = Expr::number(0.0);
  for (int k = 1; k <= sde.m; ++k)
    acc = acc + diff(diff(F, VarKind::Wiener, k), VarKind::Wiener, k);
  for (int i = 1; i <= sde.n; ++i)
    for (int j = 1; j <= sde.n; ++j)
      acc = acc + detail::sigma_sigma_t(sde, i, j) *
                      diff(diff(F, VarKind::State, i), VarKind::State, j);
  for (int j = 1; j <= sde.n; ++j)
    for (int k = 1; k <= sde.m; ++k)
      acc = acc + 2.0 * sde.sigma[j - 1][k - 1] *
                      diff(diff(F, VarKind::State, j), VarKind::Wiener, k);
  return simplify(acc);
}

/// Ito differential of F on the dynamics:
///   dF = (F_t + f^i F_{x^i} + Delta F / 2) dt
///        + (F_{w^k} + sigma^i_k F_{x^i}) dw^k.
/// Returns the dt coefficient and the m dw^k coefficients.
inline std::pair<Expr, ExprVec> ito_differential(const ItoSDE& sde,
                                                 const Expr& F) {
  Expr drift = diff(F, VarKind::Time);
  for (int i = 1; i <= sde.n; ++i)
    drift = drift + sde.f[i - 1] * diff(F, VarKind::State, i);
  drift = drift + 0.5 * ito_laplacian(sde, F);
  ExprVec diffusion;
  diffusion.reserve(static_cast<std::size_t>(sde.m));
  for (int k = 1; k <= sde.m; ++k) {
    Expr g = diff(F, VarKind::Wiener, k);
    for (int i = 1; i <= sde.n; ++i)
      g = g + sde.sigma[i - 1][k - 1] * diff(F, VarKind::State, i);
    diffusion.push_back(simplify(g));
  }
  return {simplify(drift), std::move(diffusion)};
}

namespace detail {

// Drift correction (1/2) (d sigma^i_j / d x^k) sigma^k_j relating the Ito
// and Stratonovich drifts.
inline Expr strat_correction(int n, int m, const ExprMatrix& sigma, int i) {
  Expr c = Expr::number(0.0);
  for (int j = 1; j <= m; ++j)
    for (int k = 1; k <= n; ++k)
      c = c + diff(sigma[i - 1][j - 1], VarKind::State, k) *
                  sigma[k - 1][j - 1];
  return 0.5 * c;
}

}  // namespace detail

inline StratSDE ito_to_stratonovich(const ItoSDE& sde) {
  StratSDE out;
  out.name = sde.name;
  out.n = sde.n;
  out.m = sde.m;
  out.sigma = sde.sigma;
  out.constants = sde.constants;
  out.var_names = sde.var_names;
  out.sample_box = sde.sample_box;
  out.notes = sde.notes;
  for (int i = 1; i <= sde.n; ++i)
    out.b.push_back(simplify(
        sde.f[i - 1] - detail::strat_correction(sde.n, sde.m, sde.sigma, i)));
  return out;
}

inline ItoSDE stratonovich_to_ito(const StratSDE& ssde) {
  ItoSDE out;
  out.name = ssde.name;
  out.n = ssde.n;
  out.m = ssde.m;
  out.sigma = ssde.sigma;
  out.constants = ssde.constants;
  out.var_names = ssde.var_names;
  out.sample_box = ssde.sample_box;
  out.notes = ssde.notes;
  for (int i = 1; i <= ssde.n; ++i)
    out.f.push_back(simplify(
        ssde.b[i - 1] +
        detail::strat_correction(ssde.n, ssde.m, ssde.sigma, i)));
  out.validate();
  return out;
}

inline ExprVec fp_consistency_residuals(const ItoSDE& sde,
                                        const FPCoefficients& fp);

/// A^{ij} = (sigma sigma^T)^{ij} / 2,
/// B^i    = f^i - d_j (sigma sigma^T)^{ij},
/// C      = d_i f^i - (1/2) d^2_{ij} (sigma sigma^T)^{ij}.
/// The derived coefficients are checked against the expanded divergence
/// form of the diffusion equation before being returned.
inline FPCoefficients fokker_planck_coeffs(const ItoSDE& sde,
                                           bool verify = true) {
  FPCoefficients fp;
  fp.A.assign(static_cast<std::size_t>(sde.n),
              ExprVec(static_cast<std::size_t>(sde.n), Expr::number(0.0)));
  for (int i = 1; i <= sde.n; ++i)
    for (int j = 1; j <= sde.n; ++j)
      fp.A[i - 1][j - 1] = simplify(0.5 * detail::sigma_sigma_t(sde, i, j));
  for (int i = 1; i <= sde.n; ++i) {
    Expr b = sde.f[i - 1];
    for (int j = 1; j <= sde.n; ++j)
      b = b - diff(detail::sigma_sigma_t(sde, i, j), VarKind::State, j);
    fp.B.push_back(simplify(b));
  }
  Expr c = Expr::number(0.0);
  for (int i = 1; i <= sde.n; ++i)
    c = c + diff(sde.f[i - 1], VarKind::State, i);
  for (int i = 1; i <= sde.n; ++i)
    for (int j = 1; j <= sde.n; ++j)
      c = c - 0.5 * diff(diff(detail::sigma_sigma_t(sde, i, j),
                              VarKind::State, i),
                         VarKind::State, j);
  fp.C = simplify(c);
  if (verify) {
    for (const auto& r : fp_consistency_residuals(sde, fp))
      if (!is_zero(r, sde.domain(), kDefaultZeroTol, sde.constants).passes())
        throw std::logic_error(
            "fokker-planck coefficients disagree with the divergence form");
  }
  return fp;
}

/// Residuals comparing the expanded divergence form
///   u_t = (1/2) d^2_{ij} [(sigma sigma^T)^{ij} u] - d_i [f^i u]
/// against u_t = A^{ij} u_{ij} - B^i u_i - C u, organized by derivative
/// order of u. All residuals vanish iff the two forms agree.
inline ExprVec fp_consistency_residuals(const ItoSDE& sde,
                                        const FPCoefficients& fp) {
  ExprVec res;
  for (int i = 1; i <= sde.n; ++i)
    for (int j = 1; j <= sde.n; ++j) {
      // u_{ij} coefficient: (sym part of (1/2) sigma sigma^T) - A
      Expr half = 0.25 * (detail::sigma_sigma_t(sde, i, j) +
                          detail::sigma_sigma_t(sde, j, i));
      res.push_back(simplify(half - 0.5 * (fp.A[i - 1][j - 1] +
                                           fp.A[j - 1][i - 1])));
    }
  for (int i = 1; i <= sde.n; ++i) {
    Expr ui = Expr::number(0.0);  // u_i coefficient of the divergence form
    for (int j = 1; j <= sde.n; ++j)
      ui = ui + diff(detail::sigma_sigma_t(sde, i, j), VarKind::State, j);
    ui = ui - sde.f[i - 1];
    res.push_back(simplify(ui + fp.B[i - 1]));
  }
  Expr u0 = Expr::number(0.0);
  for (int i = 1; i <= sde.n; ++i)
    for (int j = 1; j <= sde.n; ++j)
      u0 = u0 + 0.5 * diff(diff(detail::sigma_sigma_t(sde, i, j),
                                VarKind::State, i),
                           VarKind::State, j);
  for (int i = 1; i <= sde.n; ++i)
    u0 = u0 - diff(sde.f[i - 1], VarKind::State, i);
  res.push_back(simplify(u0 + fp.C));
  return res;
}

/// True iff no coefficient references the time variable.
inline bool is_autonomous(const ItoSDE& sde) {
  for (const auto& e : sde.f)
    if (contains(e, VarKind::Time)) return false;
  for (const auto& row : sde.sigma)
    for (const auto& e : row)
      if (contains(e, VarKind::Time)) return false;
  return true;
}

}  // namespace sdesym
