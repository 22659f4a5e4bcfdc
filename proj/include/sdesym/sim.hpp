#pragma once

#include <algorithm>
#include <functional>

#include "sdesym/model.hpp"
#include "sdesym/rng.hpp"

namespace sdesym {

inline constexpr const char* kGeneratorId = "philox4x32-10/icdf/v1";

struct GridSpec {
  double t0 = 0.0;
  double h = 0.01;
  int steps = 100;

  double time_at(int j) const { return t0 + h * j; }
};

/// Brownian increments on a uniform grid. Increment (j, k) is
/// sqrt(h) * Phi^{-1}(U) where U is draw j*m+k of substream
/// (seed, kStreamWiener + path_index); identical inputs reproduce identical
/// increments, independent of evaluation order.
struct WienerPath {
  GridSpec grid;
  int m = 0;
  std::vector<std::vector<double>> increments;  // steps x m
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::string generator_id = kGeneratorId;

  /// Cumulative values W(t_j) (W(t_0) = 0), one row per grid point.
  std::vector<std::vector<double>> cumulative() const {
    std::vector<std::vector<double>> w(
        static_cast<std::size_t>(grid.steps) + 1,
        std::vector<double>(static_cast<std::size_t>(m), 0.0));
    for (int j = 0; j < grid.steps; ++j)
      for (int k = 0; k < m; ++k)
        w[j + 1][k] = w[j][k] + increments[j][k];
    return w;
  }
};

inline WienerPath sample_wiener(int m, const GridSpec& grid,
                                std::uint64_t seed,
                                std::uint64_t path_index = 0) {
  if (grid.steps < 1) throw std::invalid_argument("wiener: need steps >= 1");
  if (grid.h <= 0.0) throw std::invalid_argument("wiener: need h > 0");
  WienerPath p;
  p.grid = grid;
  p.m = m;
  p.seed = seed;
  p.path_index = path_index;
  double rt = std::sqrt(grid.h);
  p.increments.assign(static_cast<std::size_t>(grid.steps),
                      std::vector<double>(static_cast<std::size_t>(m)));
  for (int j = 0; j < grid.steps; ++j)
    for (int k = 0; k < m; ++k)
      p.increments[j][k] =
          rt * rng::normal(seed, rng::kStreamWiener + path_index,
                           static_cast<std::uint64_t>(j) *
                                   static_cast<std::uint64_t>(m) +
                               static_cast<std::uint64_t>(k));
  return p;
}

/// Sub-summing refinement: the coarse path at step factor*h is the exact
/// pairwise (factor-wise) sum of this path's increments. Used to run one
/// Brownian motion across a whole h-refinement ladder.
inline WienerPath coarsen(const WienerPath& fine, int factor) {
  if (factor < 1 || fine.grid.steps % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide step count");
  WienerPath c;
  c.grid = {fine.grid.t0, fine.grid.h * factor, fine.grid.steps / factor};
  c.m = fine.m;
  c.seed = fine.seed;
  c.path_index = fine.path_index;
  c.generator_id = fine.generator_id + "/sub-sum";
  c.increments.assign(static_cast<std::size_t>(c.grid.steps),
                      std::vector<double>(static_cast<std::size_t>(c.m), 0.0));
  for (int j = 0; j < c.grid.steps; ++j)
    for (int l = 0; l < factor; ++l)
      for (int k = 0; k < fine.m; ++k)
        c.increments[j][k] += fine.increments[j * factor + l][k];
  return c;
}

struct Trajectory {
  std::vector<std::vector<double>> states;  // (steps+1) x n
  std::string scheme = "euler-maruyama";
  std::string model_name;
};

struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& what, int step_,
                   std::vector<double> state_)
      : std::runtime_error(what + " at step " + std::to_string(step_)),
        step(step_),
        state(std::move(state_)) {}
  int step;
  std::vector<double> state;
};

/// x_{j+1} = x_j + f(x_j,t_j) h + sigma(x_j,t_j) dW_j. Strong order 1/2.
inline Trajectory euler_maruyama(const ItoSDE& sde,
                                 const std::vector<double>& x0,
                                 const WienerPath& path) {
  if (static_cast<int>(x0.size()) != sde.n)
    throw std::invalid_argument("euler-maruyama: x0 length != n");
  if (path.m != sde.m)
    throw std::invalid_argument("euler-maruyama: path width != m");
  ExprVec f;
  ExprMatrix sig;
  for (const auto& e : sde.f) f.push_back(substitute_params(e, sde.constants));
  for (const auto& row : sde.sigma) {
    ExprVec r;
    for (const auto& e : row) r.push_back(substitute_params(e, sde.constants));
    sig.push_back(std::move(r));
  }
  Trajectory traj;
  traj.model_name = sde.name;
  traj.states.reserve(static_cast<std::size_t>(path.grid.steps) + 1);
  traj.states.push_back(x0);
  Binding b;
  b.w.assign(static_cast<std::size_t>(sde.m), 0.0);
  std::vector<double> next(static_cast<std::size_t>(sde.n));
  for (int j = 0; j < path.grid.steps; ++j) {
    b.t = path.grid.time_at(j);
    b.x = traj.states.back();
    for (int i = 0; i < sde.n; ++i) {
      double v = b.x[static_cast<std::size_t>(i)];
      try {
        v += eval(f[static_cast<std::size_t>(i)], b) * path.grid.h;
        for (int k = 0; k < sde.m; ++k)
          v += eval(sig[static_cast<std::size_t>(i)]
                       [static_cast<std::size_t>(k)],
                    b) *
               path.increments[j][k];
      } catch (const EvalError& e) {
        throw IntegrationError(std::string("coefficient domain violation (") +
                                   e.what() + ")",
                               j, b.x);
      }
      next[static_cast<std::size_t>(i)] = v;
    }
    traj.states.push_back(next);
  }
  return traj;
}

/// A closed-form (or quadrature-form) solution driven by the same Brownian
/// increments as the integrator; returns the full state series on the grid.
using ExactSolution =
    std::function<std::vector<std::vector<double>>(
        const ItoSDE&, const std::vector<double>& x0, const WienerPath&)>;

struct ConvergenceRow {
  double h = 0.0;
  double rms_terminal_error = 0.0;
  double max_pathwise_error = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // ordered coarse -> fine
  double slope = 0.0;                // lsq fit of log(rms) vs log(h)

  /// Successive max-pathwise-error ratios row[i]/row[i+1].
  std::vector<double> halving_ratios() const {
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      r.push_back(rows[i].max_pathwise_error /
                  rows[i + 1].max_pathwise_error);
    return r;
  }
};

/// Runs Euler-Maruyama against `exact` over an h-refinement ladder. Every
/// level reuses the same Brownian motion per path via sub-summing, so the
/// comparison is pathwise. h_list entries must be integer multiples of the
/// smallest entry.
inline ConvergenceReport verify_solution(const ItoSDE& sde,
                                         const ExactSolution& exact,
                                         const std::vector<double>& x0,
                                         double t0, double T,
                                         std::vector<double> h_list, int paths,
                                         std::uint64_t seed) {
  std::sort(h_list.begin(), h_list.end());
  double h_min = h_list.front();
  int fine_steps = static_cast<int>(std::llround((T - t0) / h_min));
  if (fine_steps < 1 || std::abs(fine_steps * h_min - (T - t0)) > 1e-9 * T)
    throw std::invalid_argument("verify: T - t0 must be a multiple of min h");
  ConvergenceReport rep;
  std::vector<double> sq_sum(h_list.size(), 0.0);
  std::vector<double> sq_comp(h_list.size(), 0.0);  // Kahan compensation
  std::vector<double> max_path(h_list.size(), 0.0);
  for (int p = 0; p < paths; ++p) {
    WienerPath fine = sample_wiener(sde.m, {t0, h_min, fine_steps}, seed,
                                    static_cast<std::uint64_t>(p));
    for (std::size_t li = 0; li < h_list.size(); ++li) {
      int factor = static_cast<int>(std::llround(h_list[li] / h_min));
      if (std::abs(factor * h_min - h_list[li]) > 1e-12)
        throw std::invalid_argument(
            "verify: h_list entries must be multiples of the smallest");
      WienerPath path = factor == 1 ? fine : coarsen(fine, factor);
      Trajectory em = euler_maruyama(sde, x0, path);
      auto ex = exact(sde, x0, path);
      double terminal = 0.0, worst = 0.0;
      for (std::size_t j = 0; j < em.states.size(); ++j) {
        double d2 = 0.0;
        for (int i = 0; i < sde.n; ++i) {
          double d = em.states[j][static_cast<std::size_t>(i)] -
                     ex[j][static_cast<std::size_t>(i)];
          d2 += d * d;
        }
        worst = std::max(worst, std::sqrt(d2));
        if (j + 1 == em.states.size()) terminal = d2;
      }
      double y = terminal - sq_comp[li];
      double t = sq_sum[li] + y;
      sq_comp[li] = (t - sq_sum[li]) - y;
      sq_sum[li] = t;
      max_path[li] = std::max(max_path[li], worst);
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t li = 0; li < h_list.size(); ++li) {
    ConvergenceRow row;
    row.h = h_list[li];
    row.rms_terminal_error = std::sqrt(sq_sum[li] / paths);
    row.max_pathwise_error = max_path[li];
    rep.rows.push_back(row);
    double lx = std::log(row.h), ly = std::log(row.rms_terminal_error);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double nl = static_cast<double>(h_list.size());
  rep.slope = (nl * sxy - sx * sy) / (nl * sxx - sx * sx);
  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const ConvergenceRow& a, const ConvergenceRow& b) {
              return a.h > b.h;
            });
  return rep;
}

struct InvariantDrift {
  std::vector<double> series;  // J(t_j)
  double max_deviation = 0.0;  // max_j |J(t_j) - J(t_0)|
};

/// Evaluates J along a trajectory (w bound to the path's cumulative values)
/// and reports the worst drift from its initial value.
inline InvariantDrift monitor_invariant(const ItoSDE& sde, const Expr& J,
                                        const Trajectory& traj,
                                        const WienerPath& path) {
  Expr j = substitute_params(J, sde.constants);
  auto w = path.cumulative();
  InvariantDrift out;
  Binding b;
  for (std::size_t idx = 0; idx < traj.states.size(); ++idx) {
    b.t = path.grid.time_at(static_cast<int>(idx));
    b.x = traj.states[idx];
    b.w = w[idx];
    out.series.push_back(eval(j, b));
    out.max_deviation = std::max(
        out.max_deviation, std::abs(out.series.back() - out.series.front()));
  }
  return out;
}

/// Linear system at x*: drift f(x*,t) + Df(x*,t)(x - x*) and likewise per
/// diffusion column; Jacobians are taken symbolically, then evaluated at x*
/// with t kept symbolic.
inline ItoSDE linearize_at_point(const ItoSDE& sde,
                                 const std::vector<double>& x_star) {
  if (static_cast<int>(x_star.size()) != sde.n)
    throw std::invalid_argument("linearize: x* length != n");
  Substitution at;
  for (double v : x_star) at.x.push_back(Expr::number(v));
  auto linearize = [&](const Expr& g) {
    Expr lin = substitute(g, at);
    for (int j = 1; j <= sde.n; ++j)
      lin = lin + substitute(diff(g, VarKind::State, j), at) *
                      (Expr::state(j) - Expr::number(x_star[j - 1]));
    return simplify(lin);
  };
  ItoSDE out = sde;
  out.name = sde.name + " (linearized)";
  for (int i = 0; i < sde.n; ++i) {
    out.f[i] = linearize(sde.f[i]);
    for (int k = 0; k < sde.m; ++k)
      out.sigma[i][k] = linearize(sde.sigma[i][k]);
  }
  return out;
}

enum class Attractivity { Strong, Weak, NotAttractive };

inline const char* to_string(Attractivity a) {
  switch (a) {
    case Attractivity::Strong: return "strong";
    case Attractivity::Weak: return "weak";
    case Attractivity::NotAttractive: return "not-attractive";
  }
  return "?";
}

struct AttractivityConfig {
  int paths = 256;
  double t0 = 0.0;
  double T = 10.0;
  double h = 0.01;
  std::uint64_t seed = 0;
  std::vector<std::array<double, 2>> cloud;  // initial box, one per state
  // Verdict thresholds relative to the cloud diameter; absolute values are
  // derived unless overridden.
  double eps_strong_rel = 1e-3;
  double eps_weak_rel = 0.1;
  std::optional<double> eps_strong_abs;
  std::optional<double> eps_weak_abs;
  int decay_points = 33;  // per-time decay series resolution

  double diameter() const {
    double d2 = 0.0;
    for (const auto& r : cloud) d2 += (r[1] - r[0]) * (r[1] - r[0]);
    return std::sqrt(d2);
  }
  double eps_strong() const {
    return eps_strong_abs ? *eps_strong_abs : eps_strong_rel * diameter();
  }
  double eps_weak() const {
    return eps_weak_abs ? *eps_weak_abs : eps_weak_rel * diameter();
  }
};

struct AttractivityReport {
  Attractivity verdict = Attractivity::NotAttractive;
  int paths = 0;
  double T = 0.0;
  double sup = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double q95 = 0.0;
  double eps_strong = 0.0;
  double eps_weak = 0.0;
  double exceed_fraction = 0.0;  // fraction of (path, time) samples with
                                 // distance > eps_weak (reported, not judged)
  std::vector<double> decay_times;
  std::vector<double> decay_median;
};

/// Ensemble distance-to-manifold diagnostics. Each path draws its initial
/// state from the cloud box (substream kStreamInitialCloud + path) and its
/// Brownian increments from kStreamWiener + path; statistics are
/// accumulated order-independently.
inline AttractivityReport attractivity_diagnostics(
    const ItoSDE& sde, const Expr& distance, const AttractivityConfig& cfg) {
  if (static_cast<int>(cfg.cloud.size()) != sde.n)
    throw std::invalid_argument("attractivity: cloud box size != n");
  int steps = static_cast<int>(std::llround((cfg.T - cfg.t0) / cfg.h));
  if (steps < 1) throw std::invalid_argument("attractivity: empty horizon");
  Expr d = substitute_params(distance, sde.constants);
  GridSpec grid{cfg.t0, cfg.h, steps};

  std::vector<int> decay_idx;
  for (int q = 0; q < cfg.decay_points; ++q)
    decay_idx.push_back(
        static_cast<int>(std::llround(static_cast<double>(q) * steps /
                                      (cfg.decay_points - 1))));

  std::vector<double> terminal(static_cast<std::size_t>(cfg.paths));
  std::vector<std::vector<double>> decay(
      decay_idx.size(), std::vector<double>(static_cast<std::size_t>(cfg.paths)));
  std::size_t exceed = 0, total = 0;
  const double eps_weak = cfg.eps_weak();

  for (int p = 0; p < cfg.paths; ++p) {
    std::vector<double> x0;
    for (std::size_t i = 0; i < cfg.cloud.size(); ++i) {
      double u = rng::uniform_open01(
          cfg.seed, rng::kStreamInitialCloud + static_cast<std::uint64_t>(p),
          static_cast<std::uint64_t>(i));
      x0.push_back(cfg.cloud[i][0] + (cfg.cloud[i][1] - cfg.cloud[i][0]) * u);
    }
    WienerPath path =
        sample_wiener(sde.m, grid, cfg.seed, static_cast<std::uint64_t>(p));
    Trajectory traj = euler_maruyama(sde, x0, path);
    auto w = path.cumulative();
    Binding b;
    for (std::size_t q = 0; q < decay_idx.size(); ++q) {
      int j = decay_idx[q];
      b.t = grid.time_at(j);
      b.x = traj.states[static_cast<std::size_t>(j)];
      b.w = w[static_cast<std::size_t>(j)];
      double dv = eval(d, b);
      decay[q][static_cast<std::size_t>(p)] = dv;
      ++total;
      if (dv > eps_weak) ++exceed;
      if (j == steps) terminal[static_cast<std::size_t>(p)] = dv;
    }
  }

  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double pos = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1 - frac) + v[hi] * frac;
  };

  AttractivityReport rep;
  rep.paths = cfg.paths;
  rep.T = cfg.T;
  rep.eps_strong = cfg.eps_strong();
  rep.eps_weak = eps_weak;
  rep.sup = *std::max_element(terminal.begin(), terminal.end());
  double sum = 0.0, comp = 0.0;
  for (double v : terminal) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  rep.mean = sum / cfg.paths;
  rep.median = quantile(terminal, 0.5);
  rep.q95 = quantile(terminal, 0.95);
  rep.exceed_fraction =
      static_cast<double>(exceed) / static_cast<double>(total);
  for (std::size_t q = 0; q < decay_idx.size(); ++q) {
    rep.decay_times.push_back(grid.time_at(decay_idx[q]));
    rep.decay_median.push_back(quantile(decay[q], 0.5));
  }
  if (rep.sup <= rep.eps_strong)
    rep.verdict = Attractivity::Strong;
  else if (rep.median <= rep.eps_weak)
    rep.verdict = Attractivity::Weak;
  else
    rep.verdict = Attractivity::NotAttractive;
  return rep;
}

}  // namespace sdesym
