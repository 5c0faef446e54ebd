#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aoi/dominance.hpp"
#include "csv.hpp"

#ifndef AOI_VERSION
#define AOI_VERSION "0.0.0"
#endif

namespace aoi::cli {

namespace fs = std::filesystem;

std::string version() { return AOI_VERSION; }

namespace {

const char* action_label(Action w) {
  static constexpr const char* kLabels[] = {"idle", "update", "sample", "sample_update"};
  return kLabels[w.index()];
}

const char* controller_name(Controller c) { return c == Controller::learned ? "learned" : "zero_wait"; }

const ProblemInstance& need_instance(const ExperimentConfig& cfg, const char* command) {
  if (!cfg.instance) throw ConfigError(std::string(command) + ": the configuration has no instance section");
  return *cfg.instance;
}

class Output {
 public:
  Output(const ExperimentConfig& cfg, std::string command)
      : prov_{version(), std::move(command), cfg.hash, cfg.sim.seed} {}

  void add(std::string name, const CsvTable& table) {
    result.files.push_back({std::move(name), table.render(prov_)});
  }
  void log(std::string line) { result.log.push_back(std::move(line)); }
  void fail_check() { result.status = kExitCertification; }

  CommandResult result;

 private:
  Provenance prov_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

}  // namespace

CommandResult cmd_solve(const ExperimentConfig& cfg) {
  const ProblemInstance& inst = need_instance(cfg, "solve");
  SolveSection sec = cfg.solve.value_or(SolveSection{});
  if (sec.c_max.empty() && inst.costs.c_max > 0.0) sec.c_max.push_back(inst.costs.c_max);
  if (sec.lambdas.empty() && sec.c_max.empty())
    throw ConfigError("solve: give solver.lambdas, solver.c_max or instance.costs.c_max");

  Output out(cfg, "solve");
  const StateSpace sp(inst);
  LagrangianSolver solver(inst);

  CsvTable values({"lambda", "a_l", "a_r", "h_index", "h", "value"});
  CsvTable policy({"lambda", "a_l", "a_r", "h_index", "h", "s", "u", "action"});
  CsvTable summary({"lambda", "theta_rvi", "theta_pi", "avg_aoi", "avg_energy"});
  for (double lambda : sec.lambdas) {
    const ValueTable vt = relative_value_iteration(inst, lambda, cfg.solver);
    const LagrangianSolution sol = solver.solve(lambda);
    for (std::size_t s = 0; s < sp.num_states(); ++s) {
      const AoiState a = sp.aoi_of(s);
      const std::size_t h = sp.channel_of(s);
      const Action w = sol.policy.at(s);
      values.row(lambda, a.a_l, a.a_r, h, inst.channel.gain(h), vt.values[s]);
      policy.row(lambda, a.a_l, a.a_r, h, inst.channel.gain(h), w.s, w.u, action_label(w));
    }
    summary.row(lambda, vt.theta, sol.theta, sol.metrics.avg_aoi, sol.metrics.avg_energy);
    out.log(fmt("lambda %g: theta %.9f (RVI %.9f)", lambda, sol.theta, vt.theta));
  }
  if (!sec.lambdas.empty()) {
    out.add("values.csv", values);
    out.add("policy.csv", policy);
    out.add("lagrangian.csv", summary);
  }

  if (!sec.c_max.empty()) {
    CsvTable trace({"c_max", "step", "lambda", "avg_energy", "theta"});
    CsvTable mixture({"c_max", "lambda_star", "lambda_1", "lambda_2", "alpha", "aoi_1", "energy_1",
                      "aoi_2", "energy_2", "avg_aoi", "avg_energy"});
    CsvTable sim({"c_max", "device_id", "avg_aoi", "se_aoi", "avg_energy", "se_energy", "constraint_slack"});
    for (double c_max : sec.c_max) {
      double lambda_star;
      if (sec.search == MultiplierSearch::robbins_monro) {
        const RobbinsMonroResult rm = robbins_monro_lambda(solver, c_max, sec.robbins_monro);
        for (const auto& st : rm.trace) trace.row(c_max, st.step, st.lambda, st.avg_energy, st.theta);
        if (!rm.converged) throw NumericalError(fmt("Robbins-Monro did not settle for c_max %g", c_max));
        lambda_star = rm.lambda_star;
      } else {
        lambda_star = bisection_lambda(solver, c_max);
      }
      const MixturePolicy mix = build_mixture(solver, lambda_star, sec.eta, c_max);
      const PolicyMetrics m = mixture_metrics(mix);
      mixture.row(c_max, lambda_star, mix.lambda_1, mix.lambda_2, mix.alpha, mix.metrics_1.avg_aoi,
                  mix.metrics_1.avg_energy, mix.metrics_2.avg_aoi, mix.metrics_2.avg_energy, m.avg_aoi,
                  m.avg_energy);
      out.log(fmt("c_max %g: lambda* %.6f, AoI %.6f, energy %.6f", c_max, lambda_star, m.avg_aoi,
                  m.avg_energy));
      if (sec.simulate) {
        const SingleRunResult r = run_single(inst, mix, cfg.sim);
        sim.row(c_max, 0, r.pooled.avg_aoi, r.pooled.se_aoi, r.pooled.avg_energy, r.pooled.se_energy,
                c_max - r.pooled.avg_energy);
      }
    }
    if (sec.search == MultiplierSearch::robbins_monro) out.add("lambda_trace.csv", trace);
    out.add("mixture.csv", mixture);
    if (sec.simulate) out.add("summary.csv", sim);
  }
  return std::move(out.result);
}

CommandResult cmd_structure(const ExperimentConfig& cfg) {
  const ProblemInstance& inst = need_instance(cfg, "structure");
  if (!cfg.structure) throw ConfigError("structure: the configuration has no structure section");
  const StructureSection& sec = *cfg.structure;
  Output out(cfg, "structure");
  const StateSpace sp(inst);
  const std::size_t nh = sp.num_channels();

  CsvTable cert({"lambda", "property", "h_index", "checked", "violations", "worst"});
  CsvTable regions({"lambda", "a_l", "a_r", "h_index", "h", "action"});
  auto report = [&](double lambda, const char* name, const CheckReport& rep) {
    for (std::size_t h = 0; h < nh; ++h) {
      std::size_t count = 0;
      double worst = 0.0;
      for (const auto& v : rep.violations)
        if (v.h == h) {
          ++count;
          worst = std::max(worst, v.magnitude);
        }
      cert.row(lambda, name, h, rep.checked, count, worst);
    }
    if (!rep.pass()) {
      out.fail_check();
      out.log(fmt("lambda %g: ", lambda) + name + ": " + std::to_string(rep.violations.size()) +
              " violations");
    }
  };

  for (double lambda : sec.lambdas) {
    const ValueTable vt = relative_value_iteration(inst, lambda, cfg.solver);
    const DeterministicPolicy pol = extract_greedy_policy(inst, vt, lambda);
    report(lambda, "value_monotonicity", certify_value_monotonicity(vt));
    report(lambda, "dominance_deltas", certify_dominance_deltas(inst, vt, lambda));
    const StructureCertificate sc = certify_threshold_structure(inst, pol, vt, lambda);
    report(lambda, "idle_region", sc.idle_region);
    report(lambda, "update_region", sc.update_region);
    report(lambda, "sample_region", sc.sample_region);
    report(lambda, "sample_update", sc.sample_update);
    report(lambda, "implications", sc.implications);
    for (std::size_t s = 0; s < sp.num_states(); ++s) {
      const AoiState a = sp.aoi_of(s);
      const std::size_t h = sp.channel_of(s);
      regions.row(lambda, a.a_l, a.a_r, h, inst.channel.gain(h), action_label(pol.at(s)));
    }
    out.log(fmt("lambda %g: ", lambda) + (sc.pass() ? "certified" : "NOT certified") + ", " +
            std::to_string(sc.ties_resolved) + " ties resolved");
  }

  if (sec.sweep) {
    const SweepSpec& sw = *sec.sweep;
    const SweepReport rep = threshold_monotonicity_sweep(inst, sw.parameter, sw.grid, sw.lambda,
                                                         sw.channel_index);
    const bool by_cs = sw.parameter == SweepParameter::sampling_cost;
    CsvTable sweep({"parameter", "value", "lambda", "h_index", "h", by_cs ? "a_r" : "a_l", "threshold"});
    for (const auto& pt : rep.points)
      for (std::size_t i = 0; i < pt.threshold.size(); ++i)
        sweep.row(by_cs ? "sampling_cost" : "updating_cost", pt.value, sw.lambda, sw.channel_index,
                  inst.channel.gain(sw.channel_index), static_cast<int>(i + 1), pt.threshold[i]);
    out.add("sweep.csv", sweep);
    cert.row(sw.lambda, "sweep_monotonicity", sw.channel_index, rep.monotonicity.checked,
             rep.monotonicity.violations.size(), rep.monotonicity.worst());
    if (!rep.monotonicity.pass()) out.fail_check();
    out.log(std::string("sweep: threshold ") + (rep.monotonicity.pass() ? "monotone" : "NOT monotone") +
            " over " + std::to_string(rep.points.size()) + " costs");
  }

  if (sec.upset) {
    const UpsetSpec& up = *sec.upset;
    const ValueTable vt = relative_value_iteration(inst, up.lambda, cfg.solver);
    const DeterministicPolicy pol = extract_greedy_policy(inst, vt, up.lambda);
    CsvTable upset({"lambda", "a_l", "a_r", "h_index", "h", "u"});
    for (Age a_l : up.a_l)
      for (Age a_r = 1; a_r <= inst.cap_r; ++a_r)
        for (std::size_t h = 0; h < nh; ++h)
          upset.row(up.lambda, a_l, a_r, h, inst.channel.gain(h), pol.at(a_l, a_r, h).u);
    out.add("upset.csv", upset);
    const CheckReport rep = certify_channel_upset(inst, pol, vt, up.lambda, up.a_l);
    report(up.lambda, "channel_upset", rep);
    out.log(std::string("channel up-set: ") + (rep.pass() ? "holds" : "violated"));
  }

  out.add("certification.csv", cert);
  if (!sec.lambdas.empty()) out.add("regions.csv", regions);
  return std::move(out.result);
}

CommandResult cmd_dominance(const ExperimentConfig& cfg) {
  const ProblemInstance& inst = need_instance(cfg, "dominance");
  if (!cfg.dominance) throw ConfigError("dominance: the configuration has no dominance section");
  const DominanceSection& sec = *cfg.dominance;
  Output out(cfg, "dominance");
  std::vector<double> gains(inst.channel.gains().begin(), inst.channel.gains().end());

  struct Row {
    ChannelModel i, j;
    AoiComparison cmp;
  };
  std::vector<Row> rows;
  for (const auto& p : sec.pairs)
    rows.push_back({ChannelModel::from_weights(gains, p.weights_i), ChannelModel::from_weights(gains, p.weights_j), {}});

  std::vector<std::exception_ptr> errors(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < rows.size(); ++k) {
    try {
      rows[k].cmp = compare_optimal_aoi(inst, rows[k].i, rows[k].j, sec.c_max);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  CsvTable table({"pair", "distribution", "mean_gain", "optimal_aoi", "relation", "direction", "asserted",
                  "holds"});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    const std::string rel = to_string(r.cmp.verdict.relation);
    const std::string dir = to_string(r.cmp.verdict.direction);
    table.row(sec.pairs[k].name, "I", r.i.mean(), r.cmp.aoi_i, rel, dir, r.cmp.asserted, r.cmp.holds);
    table.row(sec.pairs[k].name, "J", r.j.mean(), r.cmp.aoi_j, rel, dir, r.cmp.asserted, r.cmp.holds);
    if (!r.cmp.holds) out.fail_check();
    out.log(sec.pairs[k].name + ": " + rel + " " + dir + fmt(", AoI %.6f vs %.6f", r.cmp.aoi_i, r.cmp.aoi_j) +
            (r.cmp.asserted ? (r.cmp.holds ? ", ordering holds" : ", ordering FAILS") : ", not asserted"));
  }
  out.add("dominance.csv", table);
  return std::move(out.result);
}

CommandResult cmd_fleet(const ExperimentConfig& cfg) {
  const ProblemInstance& base = need_instance(cfg, "fleet");
  if (!cfg.fleet) throw ConfigError("fleet: the configuration has no fleet section");
  const FleetSection& sec = *cfg.fleet;
  Output out(cfg, "fleet");

  SimConfig sim = cfg.sim;
  if (!cfg.burn_in_set) sim.burn_in = sim.horizon / 5;
  sim.validate();

  struct Run {
    std::size_t devices;
    double c_max;
    Controller controller;
    std::uint64_t seed;
    FleetRunResult result;
  };
  std::vector<Run> runs;
  for (std::size_t k : sec.devices)
    for (double c_max : sec.c_max)
      for (Controller c : sec.controllers)
        for (std::size_t r = 0; r < sim.replications; ++r) runs.push_back({k, c_max, c, sim.seed + r, {}});

  std::vector<std::exception_ptr> errors(runs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < runs.size(); ++i) {
    try {
      Run& run = runs[i];
      const FleetInstance fleet = FleetInstance::random_costs(run.devices, sec.cap, base.channel, run.c_max,
                                                              Rng(run.seed), sec.cost_lo, sec.cost_hi);
      FleetRunConfig rc;
      rc.sim = sim;
      rc.sim.seed = run.seed;
      rc.sim.replications = 1;
      rc.schedule = cfg.schedule;
      rc.controller = run.controller;
      rc.window = sec.window;
      rc.trace_every = sec.trace_every;
      run.result = run_fleet(fleet, rc);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  CsvTable summary({"devices", "c_max", "controller", "seed", "device_id", "avg_aoi", "se_aoi", "avg_energy",
                    "se_energy", "constraint_slack"});
  CsvTable comparison({"devices", "c_max", "controller", "runs", "mean_aoi", "mean_energy", "mean_slack"});
  CsvTable convergence({"devices", "c_max", "controller", "seed", "window", "end_slot", "max_dq",
                        "max_dlambda", "avg_aoi", "avg_energy"});
  CsvTable trace({"devices", "c_max", "controller", "seed", "slot", "device", "a_l", "a_r", "h_index", "s",
                  "u", "energy", "lambda"});

  for (std::size_t i = 0; i < runs.size();) {
    std::size_t j = i;
    double aoi = 0.0, energy = 0.0;
    std::size_t n = 0;
    for (; j < runs.size() && runs[j].devices == runs[i].devices && runs[j].c_max == runs[i].c_max &&
           runs[j].controller == runs[i].controller;
         ++j) {
      const Run& run = runs[j];
      const char* name = controller_name(run.controller);
      for (std::size_t d = 0; d < run.result.metrics.size(); ++d) {
        const DeviceMetrics& m = run.result.metrics[d];
        summary.row(run.devices, run.c_max, name, run.seed, d, m.avg_aoi, m.se_aoi, m.avg_energy, m.se_energy,
                    run.c_max - m.avg_energy);
        aoi += m.avg_aoi;
        energy += m.avg_energy;
        ++n;
      }
      for (const auto& w : run.result.convergence)
        convergence.row(run.devices, run.c_max, name, run.seed, w.window, w.end_slot, w.max_dq, w.max_dlambda,
                        w.avg_aoi, w.avg_energy);
      for (const auto& t : run.result.trace)
        trace.row(run.devices, run.c_max, name, run.seed, t.slot, t.device, t.a_l, t.a_r, t.h_index, t.s, t.u,
                  t.energy, t.lambda);
    }
    const double nn = static_cast<double>(n);
    comparison.row(runs[i].devices, runs[i].c_max, controller_name(runs[i].controller), j - i, aoi / nn,
                   energy / nn, runs[i].c_max - energy / nn);
    out.log(fmt("K=%g c_max=%g: ", static_cast<double>(runs[i].devices), runs[i].c_max) +
            controller_name(runs[i].controller) + fmt(" AoI %.4f, energy %.4f", aoi / nn, energy / nn));
    i = j;
  }
  out.add("summary.csv", summary);
  out.add("comparison.csv", comparison);
  out.add("convergence.csv", convergence);
  if (sec.trace_every) out.add("trace.csv", trace);

  if (sec.oracle_cap) {
    CsvTable oracle({"devices", "c_max", "seed", "cap", "oracle_theta", "semi_distributed_cost", "gap"});
    for (std::size_t k : sec.devices)
      for (double c_max : sec.c_max)
        for (std::size_t r = 0; r < sim.replications; ++r) {
          const std::uint64_t seed = sim.seed + r;
          const FleetInstance fleet = FleetInstance::random_costs(k, *sec.oracle_cap, base.channel, c_max,
                                                                  Rng(seed), sec.cost_lo, sec.cost_hi);
          std::vector<double> lambdas;
          std::vector<PerDeviceQTable> tables;
          for (const auto& d : fleet.devices) {
            LagrangianSolver s(d);
            lambdas.push_back(bisection_lambda(s, c_max));
            tables.push_back(per_device_fixed_point(d, lambdas.back()));
          }
          const CentralizedSolution orc = centralized_oracle(fleet, lambdas);
          const double semi = semi_distributed_lagrange_cost(fleet, tables);
          oracle.row(k, c_max, seed, *sec.oracle_cap, orc.theta, semi, (semi - orc.theta) / std::abs(orc.theta));
          out.log(fmt("oracle K=%g c_max=%g: theta %.6f, semi-distributed %.6f", static_cast<double>(k), c_max,
                      orc.theta, semi));
        }
    out.add("oracle.csv", oracle);
  }
  return std::move(out.result);
}

void write_artifacts(const std::string& dir, const std::vector<Artifact>& files) {
  fs::create_directories(dir);
  std::vector<fs::path> tmp;
  for (const auto& f : files) {
    const fs::path p = fs::path(dir) / (f.name + ".tmp");
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os << f.content;
    os.close();
    if (!os) throw std::runtime_error("cannot write " + p.string());
    tmp.push_back(p);
  }
  for (std::size_t i = 0; i < files.size(); ++i) fs::rename(tmp[i], fs::path(dir) / files[i].name);
}

}  // namespace aoi::cli
