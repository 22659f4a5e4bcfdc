#pragma once

#include <filesystem>
#include <set>

#include "sdesym/io.hpp"
#include "sdesym/reduction.hpp"
#include "sdesym/sim.hpp"

namespace sdesym {

/// One catalog entry: a model (possibly with named variants and restricted
/// companions) plus annotated claims about its symmetries, invariants,
/// transforms, exact solutions, and attractivity. The entry stores claims
/// only; run_entry_checks re-derives every verdict through the library.
struct CatalogEntry {
  std::string name;
  std::string provenance;
  Json raw;

  std::map<std::string, ItoSDE> models;

  const ItoSDE& model(const std::string& mname) const {
    auto it = models.find(mname);
    if (it == models.end())
      throw std::invalid_argument("catalog entry '" + name +
                                  "': unknown model '" + mname + "'");
    return it->second;
  }
};

/// Closed-form / quadrature solution kinds shipped with the catalog.
inline ExactSolution exact_solution(const std::string& kind) {
  if (kind == "gbm") {
    // x(t) = x0 exp[(alpha - beta^2/2) t + beta W(t)]
    return [](const ItoSDE& sde, const std::vector<double>& x0,
              const WienerPath& path) {
      double alpha = sde.constants.at("alpha");
      double beta = sde.constants.at("beta");
      std::vector<std::vector<double>> out{x0};
      double w = 0.0;
      for (int j = 0; j < path.grid.steps; ++j) {
        w += path.increments[j][0];
        double t = path.grid.time_at(j + 1) - path.grid.t0;
        out.push_back(
            {x0[0] * std::exp((alpha - beta * beta / 2) * t + beta * w)});
      }
      return out;
    };
  }
  if (kind == "time_integral") {
    // dx = t dw: x(t) = x0 + sum t_j dW_j with the integrator's accumulation
    // order, so the discrete solution is exact.
    return [](const ItoSDE&, const std::vector<double>& x0,
              const WienerPath& path) {
      std::vector<std::vector<double>> out{x0};
      double acc = x0[0];
      for (int j = 0; j < path.grid.steps; ++j) {
        double v = acc;
        v += 0.0 * path.grid.h;
        v += path.grid.time_at(j) * path.increments[j][0];
        acc = v;
        out.push_back({acc});
      }
      return out;
    };
  }
  if (kind == "logistic_quadrature") {
    // y = -(1/x) e^{A t + gamma w}; dy = -beta e^{A t + gamma w} dt;
    // y integrated by left-endpoint quadrature, then mapped back.
    return [](const ItoSDE& sde, const std::vector<double>& x0,
              const WienerPath& path) {
      double alpha = sde.constants.at("alpha");
      double beta = sde.constants.at("beta");
      double gamma = sde.constants.at("gamma");
      double A = alpha - gamma * gamma / 2;
      int steps = path.grid.steps;
      auto wcum = path.cumulative();
      std::vector<double> integrand(static_cast<std::size_t>(steps));
      for (int j = 0; j < steps; ++j)
        integrand[static_cast<std::size_t>(j)] =
            -beta * std::exp(A * (path.grid.time_at(j) - path.grid.t0) +
                             gamma * wcum[static_cast<std::size_t>(j)][0]);
      auto y = reconstruct(path.grid.h, path.increments, integrand, {},
                           -1.0 / x0[0]);
      std::vector<std::vector<double>> out;
      for (int j = 0; j <= steps; ++j)
        out.push_back(
            {-(1.0 / y[static_cast<std::size_t>(j)]) *
             std::exp(A * (path.grid.time_at(j) - path.grid.t0) +
                      gamma * wcum[static_cast<std::size_t>(j)][0])});
      return out;
    };
  }
  if (kind == "transient_drift") {
    // y = log x: y(t) = y0 + (e^{-t0} - e^{-t}) - (t - t0)/2 + W(t)
    return [](const ItoSDE&, const std::vector<double>& x0,
              const WienerPath& path) {
      std::vector<std::vector<double>> out{x0};
      double w = 0.0, t0 = path.grid.t0;
      for (int j = 0; j < path.grid.steps; ++j) {
        w += path.increments[j][0];
        double t = path.grid.time_at(j + 1);
        out.push_back({x0[0] * std::exp(std::exp(-t0) - std::exp(-t) -
                                        (t - t0) / 2 + w)});
      }
      return out;
    };
  }
  throw std::invalid_argument("unknown exact solution kind: " + kind);
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

inline CatalogEntry load_entry(const std::string& path) {
  CatalogEntry e;
  e.raw = io::load_file(path);
  e.name = e.raw.value("name", "");
  e.provenance = e.raw.value("provenance", "");
  for (const auto& mj : e.raw.at("models")) {
    ItoSDE sde = io::model_from_json(mj);
    e.models[sde.name] = sde;
  }
  return e;
}

inline std::vector<CatalogEntry> catalog_entries(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& p : std::filesystem::directory_iterator(dir))
    if (p.path().extension() == ".json") files.push_back(p.path());
  std::sort(files.begin(), files.end());
  std::vector<CatalogEntry> out;
  for (const auto& f : files) out.push_back(load_entry(f.string()));
  return out;
}

// ---------------------------------------------------------------------------
// Check engine
// ---------------------------------------------------------------------------

struct CheckItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckReport {
  std::string entry;
  std::vector<CheckItem> items;

  bool pass() const {
    for (const auto& i : items)
      if (!i.pass) return false;
    return true;
  }
  int failures() const {
    int n = 0;
    for (const auto& i : items)
      if (!i.pass) ++n;
    return n;
  }
};

/// Check categories, so callers can time or rerun subsets.
enum class CheckCategory {
  Schema,
  Symmetry,
  Bracket,
  Invariant,
  Transform,
  Structure,
  Pinned,
  Linearize,
  Attractivity,
};

inline const std::set<CheckCategory>& all_check_categories() {
  static const std::set<CheckCategory> all = {
      CheckCategory::Schema,    CheckCategory::Symmetry,
      CheckCategory::Bracket,   CheckCategory::Invariant,
      CheckCategory::Transform, CheckCategory::Structure,
      CheckCategory::Pinned,    CheckCategory::Linearize,
      CheckCategory::Attractivity};
  return all;
}

namespace detail {

inline ItoSDE with_constants(const ItoSDE& sde, const Json& overrides) {
  ItoSDE out = sde;
  for (auto it = overrides.begin(); it != overrides.end(); ++it)
    out.constants[it.key()] = it.value().get<double>();
  return out;
}

inline AttractivityConfig attract_cfg_from_json(const Json& j) {
  AttractivityConfig cfg;
  cfg.paths = j.value("paths", 256);
  cfg.t0 = j.value("t0", 0.0);
  cfg.T = j.at("T");
  cfg.h = j.at("h");
  cfg.seed = j.value("seed", 0);
  for (const auto& r : j.at("cloud"))
    cfg.cloud.push_back({r[0].get<double>(), r[1].get<double>()});
  if (j.contains("eps_strong")) cfg.eps_strong_abs = j["eps_strong"];
  if (j.contains("eps_weak")) cfg.eps_weak_abs = j["eps_weak"];
  return cfg;
}

inline SimpleVectorField parse_field(const Json& j, const ItoSDE& sde) {
  return io::field_from_json(j, sde);
}

}  // namespace detail

/// Re-derives every claim in the entry through the library and reports one
/// pass/fail item per claim.
inline CheckReport run_entry_checks(
    const CatalogEntry& entry,
    const std::set<CheckCategory>& categories = all_check_categories(),
    double tol = kDefaultZeroTol) {
  CheckReport report;
  report.entry = entry.name;
  auto add = [&](const std::string& name, bool pass,
                 const std::string& detail = "") {
    report.items.push_back({entry.name + ": " + name, pass, detail});
  };
  auto enabled = [&](CheckCategory c) { return categories.count(c) > 0; };

  if (enabled(CheckCategory::Schema)) {
    for (const auto& [mname, sde] : entry.models) {
      ItoSDE back = io::model_from_json(io::model_to_json(sde));
      bool ok = back.n == sde.n && back.m == sde.m;
      for (int i = 0; ok && i < sde.n; ++i) {
        ok = structurally_equal(simplify(back.f[i]), simplify(sde.f[i]));
        for (int k = 0; ok && k < sde.m; ++k)
          ok = structurally_equal(simplify(back.sigma[i][k]),
                                  simplify(sde.sigma[i][k]));
      }
      add("schema round trip (" + mname + ")", ok);
    }
  }

  std::map<std::string, SimpleVectorField> named_fields;
  if (entry.raw.contains("symmetry_checks")) {
    for (const auto& sc : entry.raw["symmetry_checks"]) {
      const ItoSDE& sde = entry.model(sc.at("model"));
      SimpleVectorField X = detail::parse_field(sc.at("field"), sde);
      named_fields[sc["field"].value("name", "")] = X;
      if (!enabled(CheckCategory::Symmetry)) continue;
      auto v = check_symmetry(sde, X, tol);
      bool expect_pass = sc.at("expect") == "pass";
      bool ok = v.pass() == expect_pass;
      std::string detail = std::string("status ") +
                           (v.pass() ? "pass" : "fail") + ", max residual " +
                           std::to_string(v.max_abs());
      if (expect_pass && sc.contains("classification"))
        ok = ok && std::string(to_string(v.classification)) ==
                       sc["classification"].get<std::string>();
      if (!expect_pass) {
        // a reproducible witness must accompany the failure
        bool witness = (v.drift.status == ZeroStatus::NonZero &&
                        v.drift.witness.has_value()) ||
                       (v.diffusion.status == ZeroStatus::NonZero &&
                        v.diffusion.witness.has_value());
        ok = ok && witness;
      }
      add("symmetry '" + sc["field"].value("name", "") + "' on " +
              sc.at("model").get<std::string>(),
          ok, detail);
    }
  }

  if (enabled(CheckCategory::Bracket) && entry.raw.contains("bracket_checks")) {
    for (const auto& bc : entry.raw["bracket_checks"]) {
      const ItoSDE& sde = entry.model(bc.at("model"));
      const auto& X = named_fields.at(bc.at("x"));
      const auto& Y = named_fields.at(bc.at("y"));
      SimpleVectorField Z = commutator(X, Y);
      bool ok = true;
      std::string detail;
      if (bc.contains("expect")) {
        auto v = check_symmetry(sde, Z, tol);
        bool expect_pass = bc["expect"] == "symmetry";
        ok = v.pass() == expect_pass;
        detail = "bracket max residual " + std::to_string(v.max_abs());
      }
      if (bc.contains("equals")) {
        double scale = bc["equals"].value("scale", 1.0);
        SimpleVectorField W =
            bc["equals"].at("field") == "zero"
                ? zero_field(sde.n, sde.m)
                : named_fields.at(bc["equals"].at("field"));
        for (int i = 0; i < sde.n; ++i)
          ok = ok && is_zero(Z.phi[i] - scale * W.phi[i], sde.domain(), tol,
                             sde.constants)
                         .passes();
        for (int i = 0; i < sde.m; ++i)
          for (int j = 0; j < sde.m; ++j)
            ok = ok && std::abs(Z.R[i][j] - scale * W.R[i][j]) <= 1e-12;
      }
      add("bracket [" + bc.at("x").get<std::string>() + ", " +
              bc.at("y").get<std::string>() + "]",
          ok, detail);
    }
  }

  if (enabled(CheckCategory::Invariant) &&
      entry.raw.contains("invariant_checks")) {
    for (const auto& ic : entry.raw["invariant_checks"]) {
      const ItoSDE& sde = entry.model(ic.at("model"));
      io::InvariantDoc doc = io::invariant_from_json(ic.at("invariant"), sde);
      std::string label = "invariant '" + doc.candidate.name + "'";
      auto [drift, diffusion] = invariance_residuals(sde, doc.candidate.J);
      auto dz = is_zero(drift, sde.domain(), tol, sde.constants);
      bool diff_zero = true;
      double max_res = dz.max_abs;
      for (const auto& d : diffusion) {
        auto z = is_zero(d, sde.domain(), tol, sde.constants);
        diff_zero = diff_zero && z.passes();
        max_res = std::max(max_res, z.max_abs);
      }
      bool full = dz.passes() && diff_zero;
      bool ok = full == ic.at("expect_full").get<bool>();
      if (ic.contains("expect_diffusion_zero"))
        ok = ok && diff_zero == ic["expect_diffusion_zero"].get<bool>();
      add(label + " full residuals", ok,
          "max residual " + std::to_string(max_res));
      for (std::size_t li = 0; li < doc.levels.size(); ++li) {
        const auto& lj = ic["invariant"]["level_sets"][li];
        auto verdict = conditional_invariance_check(sde, doc.levels[li]);
        bool want_cond = lj.at("expect") == "conditional";
        bool lok =
            (verdict.status == ConditionalStatus::Conditional) == want_cond;
        if (lj.contains("expect_factored"))
          lok = lok && verdict.factored == lj["expect_factored"].get<bool>();
        if (!want_cond) lok = lok && verdict.witness.has_value();
        add(label + " level c=" + std::to_string(doc.levels[li].c), lok,
            "points " + std::to_string(verdict.points));
      }
    }
  }

  if (enabled(CheckCategory::Transform) &&
      entry.raw.contains("transform_checks")) {
    for (const auto& tc : entry.raw["transform_checks"]) {
      const ItoSDE& sde = entry.model(tc.at("model"));
      Transform T = io::transform_from_json(tc.at("transform"), sde);
      auto out = change_variables(sde, T);
      bool ok = out.is_ito() == tc.at("expect_ito").get<bool>();
      SampleDomain box =
          T.sample_box ? *T.sample_box : sde.domain();
      ParseContext yctx = io::context_for(sde, "y");
      if (tc.contains("expected_drift"))
        for (int i = 0; i < sde.n; ++i) {
          Expr want =
              parse(tc["expected_drift"][i].get<std::string>(), yctx);
          ok = ok && is_zero(out.drift[i] - want, box, tol, sde.constants)
                         .passes();
        }
      if (tc.contains("expected_diffusion"))
        for (int i = 0; i < sde.n; ++i)
          for (int k = 0; k < sde.m; ++k) {
            Expr want = parse(
                tc["expected_diffusion"][i][k].get<std::string>(), yctx);
            ok = ok &&
                 is_zero(out.diffusion[i][k] - want, box, tol, sde.constants)
                     .passes();
          }
      add("transform '" + tc["transform"].value("name", "") + "'", ok,
          std::string("itoness ") + to_string(out.itoness));
    }
  }

  if (enabled(CheckCategory::Structure)) {
    for (const auto& [mname, sde] : entry.models) {
      ItoSDE back = stratonovich_to_ito(ito_to_stratonovich(sde));
      bool ok = true;
      for (int i = 0; i < sde.n; ++i)
        ok = ok && is_zero(back.f[i] - sde.f[i], sde.domain(), tol,
                           sde.constants)
                       .passes();
      add("stratonovich round trip (" + mname + ")", ok);

      FPCoefficients fp = fokker_planck_coeffs(sde);
      bool fok = true;
      for (const auto& r : fp_consistency_residuals(sde, fp))
        fok = fok &&
              is_zero(r, sde.domain(), tol, sde.constants).passes();
      add("fokker-planck form agreement (" + mname + ")", fok);
    }
  }

  if (enabled(CheckCategory::Pinned) && entry.raw.contains("pinned_checks")) {
    for (const auto& pc : entry.raw["pinned_checks"]) {
      const ItoSDE& sde = entry.model(pc.at("model"));
      std::vector<double> x0;
      for (const auto& v : pc.at("x0")) x0.push_back(v.get<double>());
      double T = pc.at("T");
      double h = pc.at("h");
      int steps = static_cast<int>(std::llround(T / h));
      auto path = sample_wiener(sde.m, {0.0, h, steps},
                                pc.value("seed", 0));
      auto traj = euler_maruyama(sde, x0, path);
      int coord = pc.at("coordinate").get<int>() - 1;
      double pin = x0[static_cast<std::size_t>(coord)];
      bool ok = true;
      for (const auto& s : traj.states)
        ok = ok && s[static_cast<std::size_t>(coord)] == pin;
      add("pinned coordinate " + std::to_string(coord + 1), ok);
    }
  }

  if (enabled(CheckCategory::Linearize) &&
      entry.raw.contains("linearize_checks")) {
    for (const auto& lc : entry.raw["linearize_checks"]) {
      const ItoSDE& sde = entry.model(lc.at("model"));
      std::vector<double> at;
      for (const auto& v : lc.at("at")) at.push_back(v.get<double>());
      ItoSDE lin = linearize_at_point(sde, at);
      ParseContext ctx = io::context_for(sde);
      bool ok = true;
      for (int i = 0; i < sde.n; ++i) {
        Expr want = parse(lc.at("expected_drift")[i].get<std::string>(), ctx);
        ok = ok && is_zero(lin.f[i] - want, sde.domain(), 1e-9,
                           sde.constants)
                       .passes();
        for (int k = 0; k < sde.m; ++k) {
          Expr ws = parse(
              lc.at("expected_diffusion")[i][k].get<std::string>(), ctx);
          ok = ok && is_zero(lin.sigma[i][k] - ws, sde.domain(), 1e-9,
                             sde.constants)
                         .passes();
        }
      }
      add("linearization", ok);
    }
  }

  if (enabled(CheckCategory::Attractivity)) {
    if (entry.raw.contains("attractivity_checks")) {
      for (const auto& ac : entry.raw["attractivity_checks"]) {
        ItoSDE sde = entry.model(ac.at("model"));
        if (ac.contains("constants"))
          sde = detail::with_constants(sde, ac["constants"]);
        ParseContext ctx = io::context_for(sde);
        Expr d = parse(ac.at("distance").get<std::string>(), ctx);
        auto cfg = detail::attract_cfg_from_json(ac.at("cfg"));
        auto rep = attractivity_diagnostics(sde, d, cfg);
        bool ok = std::string(to_string(rep.verdict)) ==
                  ac.at("expect").get<std::string>();
        add("attractivity (" + ac.at("expect").get<std::string>() + ")", ok,
            "sup " + std::to_string(rep.sup) + ", median " +
                std::to_string(rep.median));
      }
    }
    if (entry.raw.contains("sweeps")) {
      for (const auto& sw : entry.raw["sweeps"]) {
        const ItoSDE& base = entry.model(sw.at("model"));
        ParseContext ctx = io::context_for(base);
        Expr d = parse(sw.at("distance").get<std::string>(), ctx);
        auto cfg = detail::attract_cfg_from_json(sw.at("cfg"));
        double tie = sw.value("tie_tol_rel", 1e-3) * cfg.diameter();
        std::vector<double> medians;
        for (const auto& v : sw.at("values")) {
          ItoSDE sde = base;
          sde.constants[sw.at("param").get<std::string>()] = v.get<double>();
          medians.push_back(attractivity_diagnostics(sde, d, cfg).median);
        }
        bool ok = true;
        std::string detail = "medians";
        for (std::size_t i = 0; i < medians.size(); ++i) {
          detail += " " + std::to_string(medians[i]);
          if (i > 0) ok = ok && medians[i] <= medians[i - 1] + tie;
        }
        add("noise sweep on " + sw.at("param").get<std::string>(), ok,
            detail);
      }
    }
  }

  return report;
}

}  // namespace sdesym
