// aoi: solve, certify and simulate the age-of-information sampling/updating
// problem from a YAML experiment file.
//
//   aoi solve     --config configs/fig2.yaml --out out/fig2
//   aoi structure --config configs/fig3a.yaml
//   aoi dominance --config configs/dominance.yaml
//   aoi fleet     --config configs/fig7.yaml --seed 3 --threads 4
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a
// certification or asserted ordering failed (outputs are still written).

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <functional>
#include <map>

#include "commands.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool quiet = false;
};

using Command = std::function<aoi::cli::CommandResult(const aoi::cli::ExperimentConfig&)>;

int run(const Options& opt, const Command& command) {
  using namespace aoi::cli;
  try {
    ExperimentConfig cfg = load_config(opt.config);
    if (opt.seed) cfg.sim.seed = *opt.seed;
    if (opt.threads > 0) omp_set_num_threads(opt.threads);
    const std::string dir = opt.out.empty() ? cfg.output_dir : opt.out;
    const CommandResult res = command(cfg);
    write_artifacts(dir, res.files);
    if (!opt.quiet) {
      for (const auto& line : res.log) std::printf("%s\n", line.c_str());
      for (const auto& f : res.files) std::printf("wrote %s/%s\n", dir.c_str(), f.name.c_str());
    }
    return res.status;
  } catch (const aoi::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const aoi::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information sampling and updating: solvers, certification and fleet simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aoi::cli::version());

  const std::map<std::string, std::pair<const char*, Command>> commands{
      {"solve", {"Lagrangian and constrained solves: values, policy map, lambda trace, mixture",
                 aoi::cli::cmd_solve}},
      {"structure", {"Certify monotonicity and threshold structure, cost sweeps, channel up-sets",
                     aoi::cli::cmd_structure}},
      {"dominance", {"Optimal AoI under stochastically ordered channel distributions", aoi::cli::cmd_dominance}},
      {"fleet", {"Learned semi-distributed control against zero-wait on a shared channel", aoi::cli::cmd_fleet}},
  };

  Options opt;
  std::string chosen;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opt.config, "Experiment YAML file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", opt.seed, "Seed (overrides sim.seed)");
    sub->add_option("--threads", opt.threads, "OpenMP threads")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", opt.quiet, "Print nothing on success");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : aoi::cli::kExitValidation;
  }
  return run(opt, commands.at(chosen).second);
}
