#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

const std::string kCli = SDESYM_CLI_PATH;
const std::string kScratch = SDESYM_TMP_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  fs::create_directories(kScratch);
  static int counter = 0;
  std::string out_file =
      kScratch + "/stdout_" + std::to_string(counter++) + ".txt";
  std::string cmd = kCli + " " + args + " > " + out_file + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out_file)};
}

std::string write_fixture(const std::string& name, const std::string& text) {
  fs::create_directories(kScratch);
  std::string path = kScratch + "/" + name;
  std::ofstream f(path);
  f << text;
  return path;
}

struct Fixtureset {
  std::string gbm = write_fixture("gbm.json", R"json({
    "name": "gbm", "n": 1, "m": 1,
    "constants": {"alpha": 1.0, "beta": 0.5},
    "drift": ["alpha*x1"], "diffusion": [["beta*x1"]]})json");
  std::string scaling = write_fixture(
      "scaling.json", R"json({"name": "scaling", "phi": ["x1"], "R": [[0.0]]})json");
  std::string translation = write_fixture(
      "translation.json",
      R"json({"name": "translation", "phi": ["1"], "R": [[0.0]]})json");
  std::string log_transform = write_fixture(
      "log.json",
      R"json({"name": "log", "forward": ["log(x1)"], "inverse": ["exp(y1)"]})json");
  std::string cart = write_fixture("cart.json", R"json({
    "name": "cart", "n": 2, "m": 2,
    "constants": {"alpha": 0.8, "beta": 0.5, "omega": 1.0, "sigma": 0.3},
    "drift": [
      "(alpha*(1 - (x1^2 + x2^2)) - sigma^2/2)*x1 - (beta*(1 - (x1^2 + x2^2)) + omega*(x1^2 + x2^2))*x2",
      "(beta*(1 - (x1^2 + x2^2)) + omega*(x1^2 + x2^2))*x1 + (alpha*(1 - (x1^2 + x2^2)) - sigma^2/2)*x2"],
    "diffusion": [
      ["sigma*(1 - (x1^2 + x2^2))*x1", "-sigma*x2"],
      ["sigma*(1 - (x1^2 + x2^2))*x2", "sigma*x1"]]})json");
  std::string r2_with_level = write_fixture("r2.json", R"json({
    "name": "squared_radius", "J": "x1^2 + x2^2",
    "kind": "configurational",
    "level_sets": [{"c": 1.0}]})json");
  std::string r2_no_level = write_fixture("r2nolevel.json", R"json({
    "name": "squared_radius", "J": "x1^2 + x2^2",
    "kind": "configurational"})json");
  std::string misawa = write_fixture("misawa.json", R"json({
    "name": "misawa", "n": 3, "m": 1, "constants": {},
    "drift": ["x3 - x2 - (2*x1 - x2 - x3)/2",
              "x1 - x3 - (2*x2 - x3 - x1)/2",
              "x2 - x1 - (2*x3 - x1 - x2)/2"],
    "diffusion": [["x3 - x2"], ["x1 - x3"], ["x2 - x1"]]})json");
  std::string misawa_j = write_fixture("misawa_j.json", R"json({
    "name": "squared_radius", "J": "x1^2 + x2^2 + x3^2",
    "kind": "configurational"})json");
};

const Fixtureset& fx() {
  static Fixtureset f;
  return f;
}

}  // namespace

TEST_CASE("cli: exit-code contract across the command matrix") {
  // 0 = pass
  CHECK(run("check-symmetry --model " + fx().gbm + " --field " +
            fx().scaling)
            .exit_code == 0);
  // 2 = mathematical failure with witness in the output
  auto fail = run("check-symmetry --model " + fx().gbm + " --field " +
                  fx().translation);
  CHECK(fail.exit_code == 2);
  CHECK(fail.stdout_text.find("witness") != std::string::npos);
  // 1 = missing file, malformed file, bad usage
  CHECK(run("check-symmetry --model /nonexistent.json --field " +
            fx().scaling)
            .exit_code == 1);
  auto bad = write_fixture("bad.json", "{ not json");
  CHECK(run("check-symmetry --model " + bad + " --field " + fx().scaling)
            .exit_code == 1);
  CHECK(run("no-such-command").exit_code == 1);
  CHECK(run("convert --model " + fx().gbm + " --direction sideways")
            .exit_code == 1);

  // invariant checks: full invariant -> 0
  CHECK(run("check-invariant --model " + fx().misawa + " --invariant " +
            fx().misawa_j)
            .exit_code == 0);
  // conditional level passes -> 0
  CHECK(run("check-invariant --model " + fx().cart + " --invariant " +
            fx().r2_with_level)
            .exit_code == 0);
  // no level and not a full invariant -> 2
  CHECK(run("check-invariant --model " + fx().cart + " --invariant " +
            fx().r2_no_level)
            .exit_code == 2);

  CHECK(run("convert --model " + fx().gbm + " --direction ito-to-strat")
            .exit_code == 0);
  CHECK(run("fokker-planck --model " + fx().gbm).exit_code == 0);
  CHECK(run("transform --model " + fx().gbm + " --transform " +
            fx().log_transform)
            .exit_code == 0);
}

TEST_CASE("cli: check-invariant reports the conditional level data") {
  auto r = run("check-invariant --model " + fx().cart + " --invariant " +
               fx().r2_with_level);
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["full"] == false);
  REQUIRE(j["levels"].size() == 1);
  CHECK(j["levels"][0]["status"] == "conditional");
  CHECK(j["levels"][0]["factored"] == true);
  CHECK(j["kind"] == "configurational");
}

TEST_CASE("cli: byte-identical reruns under a fixed seed") {
  std::string sim_args = "simulate --model " + fx().gbm +
                         " --x0 1.0 --T 0.5 --h 0.01 --paths 3 --seed 7";
  auto a = run(sim_args + " --csv-dir " + kScratch + "/csv_a");
  auto b = run(sim_args + " --csv-dir " + kScratch + "/csv_b");
  CHECK(a.exit_code == 0);
  CHECK(a.stdout_text == b.stdout_text);
  for (int p = 0; p < 3; ++p)
    CHECK(slurp(kScratch + "/csv_a/trajectory_" + std::to_string(p) +
                ".csv") ==
          slurp(kScratch + "/csv_b/trajectory_" + std::to_string(p) +
                ".csv"));
  // a different seed changes the trajectories
  auto c = run(sim_args + "1 --csv-dir " + kScratch + "/csv_c");
  CHECK(slurp(kScratch + "/csv_a/trajectory_0.csv") !=
        slurp(kScratch + "/csv_c/trajectory_0.csv"));

  auto v1 = run("attract --model " + fx().cart +
                " --distance 'sqrt((sqrt(x1^2+x2^2)-1)^2)' --cloud "
                "'0.7:1.3,-0.3:0.3' --T 0.5 --h 0.01 --paths 16 --seed 3");
  auto v2 = run("attract --model " + fx().cart +
                " --distance 'sqrt((sqrt(x1^2+x2^2)-1)^2)' --cloud "
                "'0.7:1.3,-0.3:0.3' --T 0.5 --h 0.01 --paths 16 --seed 3");
  CHECK(v1.exit_code == 0);
  CHECK(v1.stdout_text == v2.stdout_text);
}

TEST_CASE("cli: config echo makes runs reproducible from the output alone") {
  auto r = run("check-symmetry --model " + fx().gbm + " --field " +
               fx().scaling + " --seed 9 --tol 1e-8");
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["config"]["seed"] == 9);
  CHECK(j["config"]["tol"] == 1e-8);
  CHECK(j["config"]["model"] == fx().gbm);
  CHECK(j["config"]["sample_box"]["samples"] == 200);
}

TEST_CASE("cli: catalog list names the shipped entries") {
  auto r = run("catalog list --dir " + std::string(SDESYM_CATALOG_DIR));
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["entries"].size() == 13);
}

TEST_CASE("cli: sample-box override is honored") {
  auto r = run("check-symmetry --model " + fx().gbm + " --field " +
               fx().scaling + " --sample-box t=0.5:1,x=1:2,w=-2:2,n=64");
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["config"]["sample_box"]["t"][0] == 0.5);
  CHECK(j["config"]["sample_box"]["x"][0][1] == 2.0);
  CHECK(j["config"]["sample_box"]["w"][0][0] == -2.0);
  CHECK(j["config"]["sample_box"]["samples"] == 64);
}
