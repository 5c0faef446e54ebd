#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace aoi::cli {

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    const YAML::Mark m = node.Mark();
    if (!m.is_null()) os << ':' << m.line + 1 << ':' << m.column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
  }

  void allow_keys(const YAML::Node& node, const std::string& what,
                  std::initializer_list<const char*> keys) const {
    require_map(node, what);
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
    }
  }

  double real(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    const std::string& s = node.Scalar();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
      fail(node, what + " must be a number, got '" + s + "'");
    return v;
  }

  std::int64_t integer(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be an integer");
    const std::string& s = node.Scalar();
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
      fail(node, what + " must be an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t count(const YAML::Node& node, const std::string& what, std::uint64_t min = 0) const {
    const std::int64_t v = integer(node, what);
    if (v < static_cast<std::int64_t>(min)) fail(node, what + " must be at least " + std::to_string(min));
    return static_cast<std::uint64_t>(v);
  }

  bool boolean(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be true or false");
    const std::string& s = node.Scalar();
    if (s == "true") return true;
    if (s == "false") return false;
    fail(node, what + " must be true or false, got '" + s + "'");
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a string");
    return node.Scalar();
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& what) const {
    if (node.IsScalar()) return {real(node, what)};
    if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a number or a non-empty list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(real(item, what));
    return out;
  }

  std::vector<std::int64_t> integers(const YAML::Node& node, const std::string& what) const {
    if (node.IsScalar()) return {integer(node, what)};
    if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be an integer or a non-empty list");
    std::vector<std::int64_t> out;
    for (const auto& item : node) out.push_back(integer(item, what));
    return out;
  }

  /// Runs `check` and rethrows library validation errors at the node.
  template <class F>
  auto at(const YAML::Node& node, F&& check) const {
    try {
      return check();
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      fail(node, e.what());
    }
  }

 private:
  std::string origin_;
};

ProblemInstance read_instance(const Reader& r, const YAML::Node& node) {
  r.allow_keys(node, "instance", {"cap_l", "cap_r", "cap", "channel", "costs"});
  ProblemInstance inst;
  if (node["cap"]) {
    if (node["cap_l"] || node["cap_r"]) r.fail(node["cap"], "give either cap or cap_l/cap_r");
    inst.cap_l = inst.cap_r = static_cast<Age>(r.count(node["cap"], "instance.cap", 1));
  } else {
    if (!node["cap_l"] || !node["cap_r"]) r.fail(node, "instance needs cap or both cap_l and cap_r");
    inst.cap_l = static_cast<Age>(r.count(node["cap_l"], "instance.cap_l", 1));
    inst.cap_r = static_cast<Age>(r.count(node["cap_r"], "instance.cap_r", 1));
  }

  const YAML::Node ch = node["channel"];
  if (!ch) r.fail(node, "instance.channel is required");
  r.allow_keys(ch, "instance.channel", {"gains", "weights", "pmf"});
  if (!ch["gains"]) r.fail(ch, "instance.channel.gains is required");
  const auto gains = r.reals(ch["gains"], "instance.channel.gains");
  if (ch["weights"] && ch["pmf"]) r.fail(ch, "give either weights or pmf");
  inst.channel = r.at(ch, [&] {
    if (ch["pmf"]) return ChannelModel(gains, r.reals(ch["pmf"], "instance.channel.pmf"));
    if (ch["weights"]) {
      const auto w = r.reals(ch["weights"], "instance.channel.weights");
      if (w.size() != gains.size()) throw ValidationError("channel: gains and weights have different lengths");
      return ChannelModel::from_weights(gains, w);
    }
    return ChannelModel::uniform(gains);
  });

  const YAML::Node c = node["costs"];
  if (!c) r.fail(node, "instance.costs is required");
  r.allow_keys(c, "instance.costs", {"sampling", "updating", "updating_scale", "c_max"});
  if (!c["sampling"]) r.fail(c, "instance.costs.sampling is required");
  const double c_s = r.real(c["sampling"], "instance.costs.sampling");
  const double c_max = c["c_max"] ? r.real(c["c_max"], "instance.costs.c_max") : 0.0;
  if (c["updating"] && c["updating_scale"]) r.fail(c, "give either updating or updating_scale");
  if (c["updating_scale"]) {
    inst.costs = CostModel::inverse_gain(c_s, r.real(c["updating_scale"], "instance.costs.updating_scale"),
                                         inst.channel, c_max);
  } else if (c["updating"]) {
    inst.costs.c_s = c_s;
    inst.costs.c_max = c_max;
    inst.costs.c_u = r.reals(c["updating"], "instance.costs.updating");
  } else {
    r.fail(c, "instance.costs needs updating or updating_scale");
  }
  r.at(node, [&] { inst.validate(); });
  return inst;
}

void read_solver(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.allow_keys(node, "solver", {"tolerance", "damping", "lambdas", "c_max", "multiplier", "eta",
                                "max_steps", "initial_lambda", "step_rule", "simulate"});
  if (node["tolerance"]) cfg.solver.tolerance = r.real(node["tolerance"], "solver.tolerance");
  if (node["damping"]) cfg.solver.damping = r.real(node["damping"], "solver.damping");
  if (!(cfg.solver.tolerance > 0.0)) r.fail(node["tolerance"], "solver.tolerance must be positive");
  if (!(cfg.solver.damping > 0.0 && cfg.solver.damping <= 1.0))
    r.fail(node["damping"], "solver.damping must lie in (0, 1]");

  SolveSection s;
  if (node["lambdas"]) s.lambdas = r.reals(node["lambdas"], "solver.lambdas");
  for (double l : s.lambdas)
    if (!(l >= 0.0)) r.fail(node["lambdas"], "solver.lambdas must be non-negative");
  if (node["c_max"]) s.c_max = r.reals(node["c_max"], "solver.c_max");
  for (double c : s.c_max)
    if (!(c > 0.0)) r.fail(node["c_max"], "solver.c_max must be positive");
  if (node["multiplier"]) {
    const std::string m = r.text(node["multiplier"], "solver.multiplier");
    if (m == "robbins_monro") s.search = MultiplierSearch::robbins_monro;
    else if (m == "bisection") s.search = MultiplierSearch::bisection;
    else r.fail(node["multiplier"], "solver.multiplier must be robbins_monro or bisection");
  }
  if (node["eta"]) s.eta = r.real(node["eta"], "solver.eta");
  if (!(s.eta > 0.0)) r.fail(node["eta"], "solver.eta must be positive");
  if (node["max_steps"]) s.robbins_monro.max_steps = r.count(node["max_steps"], "solver.max_steps", 1);
  if (node["initial_lambda"]) {
    s.robbins_monro.initial_lambda = r.real(node["initial_lambda"], "solver.initial_lambda");
    if (!(*s.robbins_monro.initial_lambda >= 0.0))
      r.fail(node["initial_lambda"], "solver.initial_lambda must be non-negative");
  }
  if (node["step_rule"]) {
    const std::string m = r.text(node["step_rule"], "solver.step_rule");
    if (m == "harmonic") s.robbins_monro.rule = StepRule::harmonic;
    else if (m == "sign_adaptive") s.robbins_monro.rule = StepRule::sign_adaptive;
    else r.fail(node["step_rule"], "solver.step_rule must be harmonic or sign_adaptive");
  }
  if (node["simulate"]) s.simulate = r.boolean(node["simulate"], "solver.simulate");
  cfg.solve = std::move(s);
}

void read_structure(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.allow_keys(node, "structure", {"lambdas", "sweep", "upset"});
  StructureSection s;
  if (node["lambdas"]) s.lambdas = r.reals(node["lambdas"], "structure.lambdas");
  for (double l : s.lambdas)
    if (!(l >= 0.0)) r.fail(node["lambdas"], "structure.lambdas must be non-negative");
  if (const YAML::Node sw = node["sweep"]) {
    r.allow_keys(sw, "structure.sweep", {"parameter", "grid", "lambda", "channel_index"});
    SweepSpec spec;
    if (!sw["parameter"] || !sw["grid"] || !sw["channel_index"])
      r.fail(sw, "structure.sweep needs parameter, grid and channel_index");
    const std::string p = r.text(sw["parameter"], "structure.sweep.parameter");
    if (p == "sampling_cost") spec.parameter = SweepParameter::sampling_cost;
    else if (p == "updating_cost") spec.parameter = SweepParameter::updating_cost;
    else r.fail(sw["parameter"], "structure.sweep.parameter must be sampling_cost or updating_cost");
    spec.grid = r.reals(sw["grid"], "structure.sweep.grid");
    for (double v : spec.grid)
      if (!(v >= 0.0)) r.fail(sw["grid"], "structure.sweep.grid must be non-negative");
    if (sw["lambda"]) spec.lambda = r.real(sw["lambda"], "structure.sweep.lambda");
    if (!(spec.lambda >= 0.0)) r.fail(sw["lambda"], "structure.sweep.lambda must be non-negative");
    spec.channel_index = r.count(sw["channel_index"], "structure.sweep.channel_index");
    if (cfg.instance && spec.channel_index >= cfg.instance->channel.size())
      r.fail(sw["channel_index"], "structure.sweep.channel_index is outside the channel alphabet");
    s.sweep = std::move(spec);
  }
  if (const YAML::Node up = node["upset"]) {
    r.allow_keys(up, "structure.upset", {"lambda", "a_l"});
    UpsetSpec spec;
    if (!up["a_l"]) r.fail(up, "structure.upset.a_l is required");
    if (up["lambda"]) spec.lambda = r.real(up["lambda"], "structure.upset.lambda");
    if (!(spec.lambda >= 0.0)) r.fail(up["lambda"], "structure.upset.lambda must be non-negative");
    for (auto a : r.integers(up["a_l"], "structure.upset.a_l")) {
      if (a < 1 || (cfg.instance && a > cfg.instance->cap_l))
        r.fail(up["a_l"], "structure.upset.a_l must lie in [1, cap_l]");
      spec.a_l.push_back(static_cast<Age>(a));
    }
    s.upset = std::move(spec);
  }
  cfg.structure = std::move(s);
}

void read_dominance(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.allow_keys(node, "dominance", {"c_max", "pairs"});
  DominanceSection d;
  if (node["c_max"]) d.c_max = r.real(node["c_max"], "dominance.c_max");
  if (!(d.c_max > 0.0)) r.fail(node["c_max"] ? node["c_max"] : node, "dominance.c_max must be positive");
  const YAML::Node pairs = node["pairs"];
  if (!pairs || !pairs.IsSequence() || pairs.size() == 0)
    r.fail(pairs ? pairs : node, "dominance.pairs must be a non-empty list");
  for (const auto& p : pairs) {
    r.allow_keys(p, "dominance pair", {"name", "i", "j"});
    if (!p["name"] || !p["i"] || !p["j"]) r.fail(p, "a dominance pair needs name, i and j");
    DominancePair dp;
    dp.name = r.text(p["name"], "dominance pair name");
    dp.weights_i = r.reals(p["i"], "dominance pair i");
    dp.weights_j = r.reals(p["j"], "dominance pair j");
    if (cfg.instance) {
      const std::size_t n = cfg.instance->channel.size();
      if (dp.weights_i.size() != n) r.fail(p["i"], "dominance pair i needs one weight per channel gain");
      if (dp.weights_j.size() != n) r.fail(p["j"], "dominance pair j needs one weight per channel gain");
    }
    for (const auto* w : {&dp.weights_i, &dp.weights_j})
      for (double x : *w)
        if (!(x >= 0.0)) r.fail(p, "dominance weights must be non-negative");
    d.pairs.push_back(std::move(dp));
  }
  cfg.dominance = std::move(d);
}

void read_fleet(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.allow_keys(node, "fleet", {"devices", "c_max", "cap", "cost_range", "controllers", "oracle_cap",
                               "window", "trace_every"});
  FleetSection f;
  if (!node["devices"] || !node["c_max"] || !node["cap"]) r.fail(node, "fleet needs devices, c_max and cap");
  for (auto k : r.integers(node["devices"], "fleet.devices")) {
    if (k < 1) r.fail(node["devices"], "fleet.devices must be positive");
    f.devices.push_back(static_cast<std::size_t>(k));
  }
  f.c_max = r.reals(node["c_max"], "fleet.c_max");
  for (double c : f.c_max)
    if (!(c > 0.0)) r.fail(node["c_max"], "fleet.c_max must be positive");
  f.cap = static_cast<Age>(r.count(node["cap"], "fleet.cap", 1));
  if (const YAML::Node cr = node["cost_range"]) {
    const auto v = r.reals(cr, "fleet.cost_range");
    if (v.size() != 2 || !(v[0] >= 0.0) || !(v[1] >= v[0]))
      r.fail(cr, "fleet.cost_range must be [lo, hi] with 0 <= lo <= hi");
    f.cost_lo = v[0];
    f.cost_hi = v[1];
  }
  if (const YAML::Node cs = node["controllers"]) {
    if (!cs.IsSequence() || cs.size() == 0) r.fail(cs, "fleet.controllers must be a non-empty list");
    f.controllers.clear();
    for (const auto& c : cs) {
      const std::string name = r.text(c, "fleet.controllers");
      if (name == "learned") f.controllers.push_back(Controller::learned);
      else if (name == "zero_wait") f.controllers.push_back(Controller::zero_wait);
      else r.fail(c, "fleet.controllers entries must be learned or zero_wait");
    }
  }
  if (node["oracle_cap"]) f.oracle_cap = static_cast<Age>(r.count(node["oracle_cap"], "fleet.oracle_cap", 1));
  if (node["window"]) f.window = r.count(node["window"], "fleet.window", 1);
  if (node["trace_every"]) f.trace_every = r.count(node["trace_every"], "fleet.trace_every");
  cfg.fleet = std::move(f);
}

void read_schedule(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.allow_keys(node, "schedule", {"q_exponent", "lambda_gain", "lambda_exponent", "explore_scale",
                                  "explore_exponent", "initial_lambda", "reference"});
  LearningSchedule& s = cfg.schedule;
  if (node["q_exponent"]) s.q_exponent = r.real(node["q_exponent"], "schedule.q_exponent");
  if (node["lambda_gain"]) s.lambda_gain = r.real(node["lambda_gain"], "schedule.lambda_gain");
  if (node["lambda_exponent"]) s.lambda_exponent = r.real(node["lambda_exponent"], "schedule.lambda_exponent");
  if (node["explore_scale"]) s.explore_scale = r.real(node["explore_scale"], "schedule.explore_scale");
  if (node["explore_exponent"]) s.explore_exponent = r.real(node["explore_exponent"], "schedule.explore_exponent");
  if (node["initial_lambda"]) s.initial_lambda = r.real(node["initial_lambda"], "schedule.initial_lambda");
  if (node["reference"]) {
    const std::string m = r.text(node["reference"], "schedule.reference");
    if (m == "current") s.reference = ReferenceMode::current;
    else if (m == "cached") s.reference = ReferenceMode::cached;
    else r.fail(node["reference"], "schedule.reference must be current or cached");
  }
  r.at(node, [&] { s.validate(); });
}

void read_sim(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.allow_keys(node, "sim", {"horizon", "seed", "burn_in", "replications"});
  SimConfig& s = cfg.sim;
  if (node["horizon"]) s.horizon = r.count(node["horizon"], "sim.horizon", 1);
  if (node["seed"]) s.seed = r.count(node["seed"], "sim.seed");
  if (node["burn_in"]) {
    s.burn_in = r.count(node["burn_in"], "sim.burn_in");
    cfg.burn_in_set = true;
  }
  if (node["replications"]) s.replications = r.count(node["replications"], "sim.replications", 1);
  r.at(node, [&] { s.validate(); });
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  const Reader r(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << origin << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (!root || root.IsNull()) throw ConfigError(origin + ": empty configuration");
  r.allow_keys(root, "the configuration",
               {"instance", "solver", "structure", "dominance", "fleet", "schedule", "sim", "output"});

  ExperimentConfig cfg;
  cfg.hash = fnv1a_hex(text);
  if (root["instance"]) cfg.instance = read_instance(r, root["instance"]);
  if (root["solver"]) read_solver(r, root["solver"], cfg);
  if (root["structure"]) read_structure(r, root["structure"], cfg);
  if (root["dominance"]) read_dominance(r, root["dominance"], cfg);
  if (root["fleet"]) read_fleet(r, root["fleet"], cfg);
  if (root["schedule"]) read_schedule(r, root["schedule"], cfg);
  if (root["sim"]) read_sim(r, root["sim"], cfg);
  if (const YAML::Node out = root["output"]) {
    r.allow_keys(out, "output", {"dir"});
    if (out["dir"]) cfg.output_dir = r.text(out["dir"], "output.dir");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

}  // namespace aoi::cli
