// Command-line front end: symbolic symmetry/invariant verification and
// seeded Monte Carlo validation for Ito systems, with reproducible JSON/CSV
// outputs. Exit codes: 0 = pass, 2 = mathematical failure (a residual or
// verdict came out nonzero/unexpected), 1 = usage or I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sdesym/catalog.hpp"

namespace {

using namespace sdesym;

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMathFail = 2;

struct GlobalOptions {
  std::string model_path;
  std::uint64_t seed = 0;
  double tol = kDefaultZeroTol;
  int samples = 0;  // 0: keep model/default count
  std::string out;
  std::string sample_box;  // "t=LO:HI,x=LO:HI,w=LO:HI,n=COUNT"
};

std::pair<double, double> parse_range(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("range must be LO:HI, got '" + s + "'");
  return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
}

SampleDomain resolve_domain(const ItoSDE& sde, const GlobalOptions& g) {
  SampleDomain dom = sde.domain();
  dom.seed = g.seed;
  if (g.samples > 0) dom.samples = g.samples;
  if (g.sample_box.empty()) return dom;
  std::stringstream ss(g.sample_box);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("bad --sample-box entry '" + item + "'");
    std::string key = item.substr(0, eq);
    std::string val = item.substr(eq + 1);
    if (key == "n") {
      dom.samples = std::stoi(val);
    } else {
      auto [lo, hi] = parse_range(val);
      if (key == "t")
        dom.t_range = {lo, hi};
      else if (key == "x")
        for (auto& r : dom.x_ranges) r = {lo, hi};
      else if (key == "w")
        for (auto& r : dom.w_ranges) r = {lo, hi};
      else
        throw CLI::ValidationError("bad --sample-box key '" + key + "'");
    }
  }
  return dom;
}

Json config_echo(const GlobalOptions& g, const SampleDomain& dom) {
  Json c;
  c["model"] = g.model_path;
  c["seed"] = g.seed;
  c["tol"] = g.tol;
  c["sample_box"] = io::sample_box_to_json(dom);
  return c;
}

void emit(const Json& j, const GlobalOptions& g) {
  std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    if (!f) throw std::runtime_error("cannot write " + g.out);
    f << text;
  }
}

std::string format17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> parse_vector(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::array<double, 2>> parse_box(const std::string& s) {
  std::vector<std::array<double, 2>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto [lo, hi] = parse_range(item);
    out.push_back({lo, hi});
  }
  return out;
}

int cmd_check_symmetry(const GlobalOptions& g, const std::string& field_path) {
  ItoSDE sde = io::model_from_json(io::load_file(g.model_path));
  SimpleVectorField X = io::field_from_json(io::load_file(field_path), sde);
  SampleDomain dom = resolve_domain(sde, g);
  auto v = check_symmetry(sde, X, dom, g.tol);
  Json out;
  out["command"] = "check-symmetry";
  out["config"] = config_echo(g, dom);
  out["config"]["field"] = field_path;
  out["field"] = X.name;
  out["verdict"] = io::verdict_to_json(v);
  emit(out, g);
  return v.pass() ? kExitPass : kExitMathFail;
}

int cmd_check_invariant(const GlobalOptions& g, const std::string& inv_path) {
  ItoSDE sde = io::model_from_json(io::load_file(g.model_path));
  io::InvariantDoc doc =
      io::invariant_from_json(io::load_file(inv_path), sde);
  SampleDomain dom = resolve_domain(sde, g);
  auto [drift, diffusion] = invariance_residuals(sde, doc.candidate.J);
  FamilyVerdict dv, kv;
  dv.absorb(is_zero(drift, dom, g.tol, sde.constants));
  for (const auto& d : diffusion)
    kv.absorb(is_zero(d, dom, g.tol, sde.constants));
  bool full = dv.status != ZeroStatus::NonZero &&
              kv.status != ZeroStatus::NonZero;

  Json out;
  out["command"] = "check-invariant";
  out["config"] = config_echo(g, dom);
  out["config"]["invariant"] = inv_path;
  out["invariant"] = doc.candidate.name;
  out["kind"] = to_string(doc.candidate.kind());
  out["full"] = full;
  out["drift_residual"] = io::family_to_json(dv);
  out["diffusion_residuals"] = io::family_to_json(kv);
  bool all_levels_ok = !doc.levels.empty();
  out["levels"] = Json::array();
  for (auto& level : doc.levels) {
    level.seed = g.seed;
    auto verdict = conditional_invariance_check(sde, level);
    Json lj;
    lj["c"] = level.c;
    lj["status"] = verdict.pass() ? "conditional" : "not-conditional";
    lj["factored"] = verdict.factored;
    lj["points"] = verdict.points;
    lj["max_drift_abs"] = verdict.max_drift_abs;
    lj["max_diffusion_abs"] = verdict.max_diffusion_abs;
    if (verdict.witness) {
      lj["witness"] = io::binding_to_json(*verdict.witness);
      lj["witness_value"] = *verdict.witness_value;
    }
    out["levels"].push_back(lj);
    all_levels_ok = all_levels_ok && verdict.pass();
  }
  emit(out, g);
  return (full || all_levels_ok) ? kExitPass : kExitMathFail;
}

int cmd_convert(const GlobalOptions& g, const std::string& direction) {
  Json mj = io::load_file(g.model_path);
  Json out;
  out["command"] = "convert";
  out["direction"] = direction;
  if (direction == "ito-to-strat") {
    ItoSDE sde = io::model_from_json(mj);
    out["result"] = io::strat_to_json(ito_to_stratonovich(sde));
  } else if (direction == "strat-to-ito") {
    StratSDE s = io::strat_from_json(mj);
    out["result"] = io::model_to_json(stratonovich_to_ito(s));
  } else {
    throw CLI::ValidationError("direction must be ito-to-strat or "
                               "strat-to-ito");
  }
  out["config"] = Json{{"model", g.model_path}};
  emit(out, g);
  return kExitPass;
}

int cmd_fokker_planck(const GlobalOptions& g) {
  ItoSDE sde = io::model_from_json(io::load_file(g.model_path));
  SampleDomain dom = resolve_domain(sde, g);
  FPCoefficients fp = fokker_planck_coeffs(sde);
  Json out;
  out["command"] = "fokker-planck";
  out["config"] = config_echo(g, dom);
  out["A"] = Json::array();
  for (const auto& row : fp.A) {
    Json r = Json::array();
    for (const auto& e : row) r.push_back(to_string(e));
    out["A"].push_back(r);
  }
  out["B"] = Json::array();
  for (const auto& e : fp.B) out["B"].push_back(to_string(e));
  out["C"] = to_string(fp.C);
  bool consistent = true;
  for (const auto& r : fp_consistency_residuals(sde, fp))
    consistent =
        consistent && is_zero(r, dom, g.tol, sde.constants).passes();
  out["divergence_form_agrees"] = consistent;
  emit(out, g);
  return consistent ? kExitPass : kExitMathFail;
}

int cmd_transform(const GlobalOptions& g, const std::string& transform_path) {
  ItoSDE sde = io::model_from_json(io::load_file(g.model_path));
  Transform T =
      io::transform_from_json(io::load_file(transform_path), sde);
  auto result = change_variables(sde, T, 1e-9, g.tol);
  Json out;
  out["command"] = "transform";
  out["config"] = Json{{"model", g.model_path,},
                       {"transform", transform_path},
                       {"tol", g.tol}};
  out["is_ito"] = result.is_ito();
  out["itoness"] = to_string(result.itoness);
  out["drift"] = Json::array();
  for (const auto& e : result.drift) out["drift"].push_back(to_string(e));
  out["diffusion"] = Json::array();
  for (const auto& row : result.diffusion) {
    Json r = Json::array();
    for (const auto& e : row) r.push_back(to_string(e));
    out["diffusion"].push_back(r);
  }
  emit(out, g);
  return kExitPass;
}

int cmd_simulate(const GlobalOptions& g, const std::string& x0_str, double t0,
                 double T, double h, int paths, const std::string& csv_dir) {
  ItoSDE sde = io::model_from_json(io::load_file(g.model_path));
  std::vector<double> x0 = parse_vector(x0_str);
  int steps = static_cast<int>(std::llround((T - t0) / h));
  if (steps < 1) throw CLI::ValidationError("empty time grid");
  GridSpec grid{t0, h, steps};
  Json stats;
  stats["command"] = "simulate";
  stats["config"] = Json{{"model", g.model_path}, {"seed", g.seed},
                         {"x0", x0},             {"t0", t0},
                         {"T", T},               {"h", h},
                         {"paths", paths}};
  Json terminal = Json::array();
  for (int p = 0; p < paths; ++p) {
    auto path = sample_wiener(sde.m, grid, g.seed,
                              static_cast<std::uint64_t>(p));
    auto traj = euler_maruyama(sde, x0, path);
    terminal.push_back(traj.states.back());
    if (!csv_dir.empty()) {
      std::filesystem::create_directories(csv_dir);
      std::string file =
          csv_dir + "/trajectory_" + std::to_string(p) + ".csv";
      std::ofstream f(file);
      if (!f) throw std::runtime_error("cannot write " + file);
      f << "t";
      for (int i = 1; i <= sde.n; ++i) f << ", x" << i;
      for (int k = 1; k <= sde.m; ++k) f << ", w" << k;
      f << "\n";
      auto w = path.cumulative();
      for (std::size_t j = 0; j < traj.states.size(); ++j) {
        f << format17(grid.time_at(static_cast<int>(j)));
        for (double v : traj.states[j]) f << ", " << format17(v);
        for (double v : w[j]) f << ", " << format17(v);
        f << "\n";
      }
    }
  }
  stats["generator"] = kGeneratorId;
  stats["terminal_states"] = terminal;
  emit(stats, g);
  return kExitPass;
}

int cmd_verify(const GlobalOptions& g, const std::string& exact_kind,
               const std::string& x0_str, double T,
               const std::string& h_list_str, int paths,
               const std::string& slope_range) {
  ItoSDE sde = io::model_from_json(io::load_file(g.model_path));
  std::vector<double> x0 = parse_vector(x0_str);
  std::vector<double> h_list = parse_vector(h_list_str);
  auto rep = verify_solution(sde, exact_solution(exact_kind), x0, 0.0, T,
                             h_list, paths, g.seed);
  Json out;
  out["command"] = "verify";
  out["config"] = Json{{"model", g.model_path}, {"seed", g.seed},
                       {"exact", exact_kind},   {"x0", x0},
                       {"T", T},                {"h_list", h_list},
                       {"paths", paths}};
  out["rows"] = Json::array();
  for (const auto& row : rep.rows)
    out["rows"].push_back(Json{{"h", row.h},
                               {"rms_terminal_error", row.rms_terminal_error},
                               {"max_pathwise_error",
                                row.max_pathwise_error}});
  out["slope"] = rep.slope;
  bool ok = true;
  if (!slope_range.empty()) {
    auto [lo, hi] = parse_range(slope_range);
    ok = rep.slope >= lo && rep.slope <= hi;
    out["slope_within"] = ok;
  }
  emit(out, g);
  return ok ? kExitPass : kExitMathFail;
}

int cmd_attract(const GlobalOptions& g, const std::string& distance,
                const std::string& cloud, double T, double h, int paths,
                double eps_strong, double eps_weak,
                const std::string& expect) {
  ItoSDE sde = io::model_from_json(io::load_file(g.model_path));
  AttractivityConfig cfg;
  cfg.paths = paths;
  cfg.T = T;
  cfg.h = h;
  cfg.seed = g.seed;
  cfg.cloud = parse_box(cloud);
  if (eps_strong > 0) cfg.eps_strong_abs = eps_strong;
  if (eps_weak > 0) cfg.eps_weak_abs = eps_weak;
  Expr d = parse(distance, io::context_for(sde));
  auto rep = attractivity_diagnostics(sde, d, cfg);
  Json out;
  out["command"] = "attract";
  out["config"] = Json{{"model", g.model_path},
                       {"seed", g.seed},
                       {"distance", distance},
                       {"cloud", cloud},
                       {"T", T},
                       {"h", h},
                       {"paths", paths},
                       {"eps_strong", rep.eps_strong},
                       {"eps_weak", rep.eps_weak}};
  out["verdict"] = to_string(rep.verdict);
  out["sup"] = rep.sup;
  out["mean"] = rep.mean;
  out["median"] = rep.median;
  out["q95"] = rep.q95;
  out["exceed_fraction"] = rep.exceed_fraction;
  out["decay"] = Json::array();
  for (std::size_t i = 0; i < rep.decay_times.size(); ++i)
    out["decay"].push_back(
        Json{{"t", rep.decay_times[i]}, {"median", rep.decay_median[i]}});
  emit(out, g);
  if (!expect.empty() && expect != to_string(rep.verdict))
    return kExitMathFail;
  return kExitPass;
}

int cmd_catalog(const GlobalOptions& g, const std::string& dir,
                const std::string& action, bool include_slow) {
  auto entries = catalog_entries(dir);
  Json out;
  out["command"] = "catalog";
  out["config"] = Json{{"dir", dir}, {"action", action}, {"seed", g.seed}};
  if (action == "list") {
    out["entries"] = Json::array();
    for (const auto& e : entries)
      out["entries"].push_back(
          Json{{"name", e.name}, {"provenance", e.provenance}});
    emit(out, g);
    return kExitPass;
  }
  if (action != "run-all")
    throw CLI::ValidationError("catalog action must be list or run-all");
  std::set<CheckCategory> cats = all_check_categories();
  if (!include_slow) cats.erase(CheckCategory::Attractivity);
  bool all_pass = true;
  out["reports"] = Json::array();
  for (const auto& e : entries) {
    auto report = run_entry_checks(e, cats, g.tol);
    Json rj;
    rj["entry"] = e.name;
    rj["pass"] = report.pass();
    rj["checks"] = Json::array();
    for (const auto& item : report.items) {
      rj["checks"].push_back(Json{{"name", item.name},
                                  {"pass", item.pass},
                                  {"detail", item.detail}});
      std::cerr << (item.pass ? "[PASS] " : "[FAIL] ") << item.name << "\n";
    }
    all_pass = all_pass && report.pass();
    out["reports"].push_back(rj);
  }
  out["pass"] = all_pass;
  emit(out, g);
  return all_pass ? kExitPass : kExitMathFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sdesym: symbolic symmetries, invariants, and seeded Monte Carlo "
      "verification for Ito systems"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // keep --h free for step size

  GlobalOptions g;
  app.add_option("--model", g.model_path, "model JSON file");
  app.add_option("--seed", g.seed, "master seed for all randomness");
  app.add_option("--tol", g.tol, "numeric zero tolerance");
  app.add_option("--samples", g.samples, "zero-test sample count");
  app.add_option("--out", g.out, "write the JSON output here as well");
  app.add_option("--sample-box", g.sample_box,
                 "override box, e.g. t=0.1:2,x=0.2:2,w=-1:1,n=200");

  std::string field_path, inv_path, transform_path, direction;
  std::string x0_str = "1.0", h_list_str, exact_kind, distance, cloud;
  std::string slope_range, expect_verdict, csv_dir;
  std::string catalog_dir = "data/catalog/v1", catalog_action = "list";
  double t0 = 0.0, T = 1.0, h = 0.01, eps_strong = 0.0, eps_weak = 0.0;
  int paths = 1;
  bool include_slow = false;

  auto* cs = app.add_subcommand("check-symmetry",
                                "residuals of the determining equations");
  cs->add_option("--field", field_path, "vector-field JSON file")->required();

  auto* ci = app.add_subcommand("check-invariant",
                                "invariance residuals and level sets");
  ci->add_option("--invariant", inv_path, "invariant JSON file")->required();

  auto* cv = app.add_subcommand("convert", "ito <-> stratonovich drift map");
  cv->add_option("--direction", direction, "ito-to-strat | strat-to-ito")
      ->required();

  app.add_subcommand("fokker-planck",
                     "diffusion-equation coefficients A, B, C");

  auto* tr = app.add_subcommand("transform", "ito-rule change of variables");
  tr->add_option("--transform", transform_path, "transform JSON file")
      ->required();

  auto* si = app.add_subcommand("simulate", "euler-maruyama trajectories");
  si->set_help_flag("--help");
  si->add_option("--x0", x0_str, "initial state, comma separated");
  si->add_option("--t0", t0, "start time");
  si->add_option("--T", T, "end time");
  si->add_option("--h", h, "step size");
  si->add_option("--paths", paths, "number of paths");
  si->add_option("--csv-dir", csv_dir, "directory for trajectory CSV files");

  auto* ve = app.add_subcommand("verify",
                                "strong convergence against a closed form");
  ve->set_help_flag("--help");
  ve->add_option("--exact", exact_kind,
                 "gbm | time_integral | logistic_quadrature | "
                 "transient_drift")
      ->required();
  ve->add_option("--x0", x0_str, "initial state");
  ve->add_option("--T", T, "horizon");
  ve->add_option("--h-list", h_list_str, "step sizes, comma separated")
      ->required();
  ve->add_option("--paths", paths, "ensemble size");
  ve->add_option("--expect-slope", slope_range,
                 "assert the fitted slope lies in LO:HI");

  auto* at = app.add_subcommand("attract",
                                "ensemble distance-to-manifold diagnostics");
  at->set_help_flag("--help");
  at->add_option("--distance", distance, "distance expression d(x) >= 0")
      ->required();
  at->add_option("--cloud", cloud, "initial box, LO:HI per coordinate")
      ->required();
  at->add_option("--T", T, "horizon");
  at->add_option("--h", h, "step size");
  at->add_option("--paths", paths, "ensemble size");
  at->add_option("--eps-strong", eps_strong, "absolute strong threshold");
  at->add_option("--eps-weak", eps_weak, "absolute weak threshold");
  at->add_option("--expect", expect_verdict,
                 "assert verdict: strong | weak | not-attractive");

  auto* ca = app.add_subcommand("catalog", "list or re-derive the catalog");
  ca->add_option("--dir", catalog_dir, "catalog directory");
  ca->add_option("action", catalog_action, "list | run-all");
  ca->add_flag("--include-slow", include_slow,
               "also run the Monte Carlo attractivity checks");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough(true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (cs->parsed()) return cmd_check_symmetry(g, field_path);
    if (ci->parsed()) return cmd_check_invariant(g, inv_path);
    if (cv->parsed()) return cmd_convert(g, direction);
    if (app.get_subcommand("fokker-planck")->parsed())
      return cmd_fokker_planck(g);
    if (tr->parsed()) return cmd_transform(g, transform_path);
    if (si->parsed())
      return cmd_simulate(g, x0_str, t0, T, h, paths, csv_dir);
    if (ve->parsed())
      return cmd_verify(g, exact_kind, x0_str, T, h_list_str, paths,
                        slope_range);
    if (at->parsed())
      return cmd_attract(g, distance, cloud, T, h, paths, eps_strong,
                         eps_weak, expect_verdict);
    if (ca->parsed())
      return cmd_catalog(g, catalog_dir, catalog_action, include_slow);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
