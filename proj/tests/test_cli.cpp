#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"

using namespace aoi;
using namespace aoi::cli;
namespace fs = std::filesystem;

namespace {

const std::string kInstance = R"(instance:
  cap: 4
  channel:
    gains: [1, 2]
  costs:
    sampling: 2
    updating_scale: 3.5
    c_max: 3
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const Artifact* find(const CommandResult& r, const std::string& name) {
  for (const auto& f : r.files)
    if (f.name == name) return &f;
  return nullptr;
}

int run_cli(const std::string& args) {
  const int raw = std::system((std::string(AOI_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aoi_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("every bundled configuration parses") {
  for (const auto& entry : fs::directory_iterator(fs::path(AOI_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg = load_config(entry.path().string()));
    CHECK(cfg.hash.size() == 16);
  }
}

TEST_CASE("instance fields map onto the model") {
  const auto cfg = parse_config(kInstance + "sim:\n  seed: 7\n  burn_in: 10\n");
  REQUIRE(cfg.instance);
  CHECK(cfg.instance->cap_l == 4);
  CHECK(cfg.instance->cap_r == 4);
  CHECK(cfg.instance->channel.prob(0) == 0.5);
  CHECK(cfg.instance->costs.c_u[1] == 1.75);
  CHECK(cfg.sim.seed == 7);
  CHECK(cfg.burn_in_set);
  const auto split = parse_config(R"(instance:
  cap_l: 3
  cap_r: 5
  channel: {gains: [1, 2, 4], pmf: [0.25, 0.25, 0.5]}
  costs: {sampling: 1, updating: [3, 2, 1]}
)");
  CHECK(split.instance->cap_l == 3);
  CHECK(split.instance->cap_r == 5);
  CHECK(split.instance->costs.c_u == std::vector<double>{3, 2, 1});
  CHECK(split.instance->channel.prob(2) == 0.5);
}

TEST_CASE("errors name the file, line and column") {
  const std::string unknown = error_of(kInstance + "sim:\n  horizon: 100\n  sed: 3\n");
  CHECK(unknown.find("test.yaml:11:3") != std::string::npos);
  CHECK(unknown.find("unknown key 'sed'") != std::string::npos);

  const std::string bad_number = error_of(kInstance + "solver:\n  lambdas: [0.1, abc]\n");
  CHECK(bad_number.find("test.yaml:10:") != std::string::npos);
  CHECK(bad_number.find("abc") != std::string::npos);

  const std::string top = error_of("instanse:\n  cap: 3\n");
  CHECK(top.find("test.yaml:1:1") != std::string::npos);

  // a model invariant reported at the node that broke it
  std::string decreasing = kInstance;
  decreasing.replace(decreasing.find("[1, 2]"), 6, "[2, 1]");
  const std::string model = error_of(decreasing);
  CHECK(model.find("test.yaml:4:") != std::string::npos);
  CHECK(model.find("increasing") != std::string::npos);

  const std::string syntax = error_of("instance: [1, 2\n");
  CHECK(syntax.find("test.yaml:") == 0);
  CHECK(error_of("") == "test.yaml: empty configuration");
  CHECK(error_of(kInstance + "solver:\n  multiplier: newton\n").find("robbins_monro or bisection") !=
        std::string::npos);
  CHECK(error_of(kInstance + "structure:\n  upset: {a_l: [9]}\n").find("[1, cap_l]") != std::string::npos);
  CHECK(error_of(kInstance + "sim:\n  horizon: 10\n  burn_in: 10\n").find("burn_in") != std::string::npos);
  CHECK(error_of(kInstance + "schedule:\n  q_exponent: 0.4\n").find("q_exponent") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/x.yaml"), ConfigError);
}

TEST_CASE("csv cells render in shortest round-trip form") {
  CsvTable t({"a", "b", "c", "d"});
  t.row(0.1, 3, true, "x");
  t.row(1.0 / 3.0, -2, false, std::string("y"));
  const std::string out = t.render({"1.0", "solve", "abc", 4});
  CHECK(out == "# aoi 1.0 command=solve config=abc seed=4\na,b,c,d\n0.1,3,1,x\n0.3333333333333333,-2,0,y\n");
  CHECK(t.rows() == 2);
}

TEST_CASE("solve writes the value, policy and multiplier tables deterministically") {
  const std::string text = kInstance + R"(solver:
  lambdas: [0.1, 1]
  c_max: [3]
  multiplier: bisection
  simulate: true
sim:
  horizon: 5000
  replications: 2
)";
  const auto cfg = parse_config(text);
  const auto a = cmd_solve(cfg);
  const auto b = cmd_solve(cfg);
  CHECK(a.status == kExitOk);
  for (const char* name : {"values.csv", "policy.csv", "lagrangian.csv", "mixture.csv", "summary.csv"}) {
    CAPTURE(name);
    const Artifact* fa = find(a, name);
    const Artifact* fb = find(b, name);
    REQUIRE(fa);
    REQUIRE(fb);
    CHECK(fa->content == fb->content);
    CHECK(fa->content.rfind("# aoi ", 0) == 0);
  }
  CHECK_FALSE(find(a, "lambda_trace.csv"));  // bisection leaves no trace
  // one row per state and multiplier in the value table
  const std::string& values = find(a, "values.csv")->content;
  CHECK(std::count(values.begin(), values.end(), '\n') == 2 + 2 * 32);
}

TEST_CASE("commands refuse configurations without their section") {
  const auto cfg = parse_config(kInstance);
  CHECK_THROWS_AS(cmd_structure(cfg), ValidationError);
  CHECK_THROWS_AS(cmd_dominance(cfg), ValidationError);
  CHECK_THROWS_AS(cmd_fleet(cfg), ValidationError);
}

TEST_CASE("artifacts are written whole and replace older files") {
  const fs::path dir = scratch_dir("write") / "nested";
  write_artifacts(dir.string(), {{"a.csv", "x\n"}, {"b.csv", "y\n"}});
  write_artifacts(dir.string(), {{"a.csv", "z\n"}});
  std::ifstream in(dir / "a.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "z\n");
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("the binary maps failures to exit codes and writes nothing on bad input") {
  const fs::path dir = scratch_dir("binary");
  const fs::path bad = dir / "bad.yaml";
  std::ofstream(bad) << kInstance << "solver:\n  lambdas: [0.1]\n  bogus: 1\n";
  const fs::path out = dir / "out";
  CHECK(run_cli("solve --config " + bad.string() + " --out " + out.string()) == kExitValidation);
  CHECK_FALSE(fs::exists(out));

  CHECK(run_cli("solve --config " + (dir / "missing.yaml").string()) == kExitValidation);
  CHECK(run_cli("frobnicate") == kExitValidation);
  CHECK(run_cli("--version") == kExitOk);

  const fs::path good = dir / "good.yaml";
  std::ofstream(good) << kInstance << "solver:\n  lambdas: [0.1]\n";
  CHECK(run_cli("solve --quiet --config " + good.string() + " --out " + out.string()) == kExitOk);
  CHECK(fs::exists(out / "values.csv"));
  CHECK(fs::exists(out / "policy.csv"));

  // an asserted ordering that fails still writes its table, with exit code 3
  const fs::path dom = dir / "dom";
  CHECK(run_cli("dominance --quiet --config " + std::string(AOI_SOURCE_DIR) + "/configs/dominance.yaml --out " +
                dom.string()) == kExitCertification);
  CHECK(fs::exists(dom / "dominance.csv"));
}
