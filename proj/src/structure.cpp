#include "aoi/structure.hpp"

#include <algorithm>
#include <cmath>

namespace aoi {

double dominance_delta(const ProblemInstance& inst, const ValueTable& vt, std::size_t state,
                       Action w, Action w_prime, double lambda) {
  if (w == w_prime) return 0.0;
  const auto j = state_action_costs(inst, vt, lambda, state);
  return j[w.index()] - j[w_prime.index()];
}

ThresholdReport::ThresholdReport(const ProblemInstance& inst, const ValueTable& vt, double lambda,
                                 double slack)
    : space_(vt.space), lambda_(lambda) {
  const std::size_t n = space_.num_states();
  const std::size_t nh = space_.num_channels();
  const auto table = state_action_cost(inst, vt, lambda);
  dominant_.assign(n * kNumActions, 0);
  for (std::size_t s = 0; s < n; ++s)
    for (int w = 0; w < kNumActions; ++w) {
      bool dom = true;
      for (int v = 0; v < kNumActions && dom; ++v)
        if (v != w) dom = table.j[s * kNumActions + w] - table.j[s * kNumActions + v] <= slack;
      dominant_[s * kNumActions + w] = dom;
    }

  const Age cl = space_.cap_l(), cr = space_.cap_r();
  for (int w = 0; w < kNumActions; ++w) {
    phi_plus_[w].assign(nh * cr, kMinusInfinity);
    phi_minus_[w].assign(nh * cr, kPlusInfinity);
    psi_plus_[w].assign(nh * cl, kMinusInfinity);
    psi_minus_[w].assign(nh * cl, kPlusInfinity);
    for (std::size_t h = 0; h < nh; ++h)
      for (Age a_l = 1; a_l <= cl; ++a_l)
        for (Age a_r = 1; a_r <= cr; ++a_r) {
          if (!dominant_[space_.index(a_l, a_r, h) * kNumActions + w]) continue;
          const std::size_t r = row_r(a_r, h), l = row_l(a_l, h);
          phi_plus_[w][r] = std::max(phi_plus_[w][r], a_l);
          phi_minus_[w][r] = std::min(phi_minus_[w][r], a_l);
          psi_plus_[w][l] = std::max(psi_plus_[w][l], a_r);
          psi_minus_[w][l] = std::min(psi_minus_[w][l], a_r);
        }
  }
}

int ThresholdReport::psi_update_minus(Age a_l, std::size_t h) const {
  return std::min(psi_minus(kUpdate, a_l, h), psi_minus(kSampleUpdate, a_l, h));
}

bool ThresholdReport::in_idle_region(Age a_l, Age a_r, std::size_t h) const {
  return a_l <= phi_plus(kIdle, a_r, h) && a_r <= psi_plus(kIdle, a_l, h);
}

ThresholdReport compute_thresholds(const ProblemInstance& inst, const ValueTable& vt, double lambda,
                                   double slack) {
  return ThresholdReport(inst, vt, lambda, slack);
}

double CheckReport::worst() const {
  double m = 0.0;
  for (const auto& v : violations) m = std::max(m, v.magnitude);
  return m;
}

void CheckReport::merge(const CheckReport& other) {
  checked += other.checked;
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

CheckReport certify_value_monotonicity(const ValueTable& vt, double slack) {
  const StateSpace& sp = vt.space;
  CheckReport rep;
  for (std::size_t h = 0; h < sp.num_channels(); ++h)
    for (Age a_l = 1; a_l <= sp.cap_l(); ++a_l)
      for (Age a_r = 1; a_r <= sp.cap_r(); ++a_r) {
        const double v = vt.at(a_l, a_r, h);
        if (a_l < sp.cap_l()) {
          ++rep.checked;
          const double d = v - vt.at(a_l + 1, a_r, h);
          if (d > slack) rep.violations.push_back({"V non-decreasing in a_l", a_l, a_r, h, d});
        }
        if (a_r < sp.cap_r()) {
          ++rep.checked;
          const double d = v - vt.at(a_l, a_r + 1, h);
          if (d > slack) rep.violations.push_back({"V non-decreasing in a_r", a_l, a_r, h, d});
        }
      }
  return rep;
}

namespace {

enum class Axis { a_l, a_r };

// Checks sign * delta(w, w') non-decreasing along the axis.
void check_delta(const StateActionCost& j, Action w, Action wp, Axis axis, double sign,
                 const std::string& name, double slack, CheckReport& rep) {
  const StateSpace& sp = j.space;
  for (std::size_t h = 0; h < sp.num_channels(); ++h)
    for (Age a_l = 1; a_l <= sp.cap_l(); ++a_l)
      for (Age a_r = 1; a_r <= sp.cap_r(); ++a_r) {
        const Age nl = axis == Axis::a_l ? a_l + 1 : a_l;
        const Age nr = axis == Axis::a_r ? a_r + 1 : a_r;
        if (nl > sp.cap_l() || nr > sp.cap_r()) continue;
        const std::size_t s0 = sp.index(a_l, a_r, h), s1 = sp.index(nl, nr, h);
        const double d0 = j.at(s0, w) - j.at(s0, wp);
        const double d1 = j.at(s1, w) - j.at(s1, wp);
        ++rep.checked;
        const double drop = sign * (d0 - d1);
        if (drop > slack) rep.violations.push_back({name, a_l, a_r, h, drop});
      }
}

}  // namespace

CheckReport certify_dominance_deltas(const ProblemInstance& inst, const ValueTable& vt,
                                     double lambda, double slack) {
  const auto j = state_action_cost(inst, vt, lambda);
  CheckReport rep;
  auto label = [](Action w, Action wp, const char* trend) {
    return "dJ " + to_string(w) + "-" + to_string(wp) + " " + trend;
  };
  check_delta(j, kIdle, kSample, Axis::a_l, 1.0, label(kIdle, kSample, "non-decreasing in a_l"), slack, rep);
  for (Action wp : {kUpdate, kSampleUpdate})
    check_delta(j, kIdle, wp, Axis::a_r, 1.0, label(kIdle, wp, "non-decreasing in a_r"), slack, rep);
  for (int wi = 0; wi < kNumActions; ++wi) {
    const Action wp = Action::from_index(wi);
    for (Action w : {kUpdate, kSampleUpdate})
      if (wp != w)
        check_delta(j, w, wp, Axis::a_r, -1.0, label(w, wp, "non-increasing in a_r"), slack, rep);
    if (wp != kSample)
      check_delta(j, kSample, wp, Axis::a_l, -1.0, label(kSample, wp, "non-increasing in a_l"), slack,
                  rep);
  }
  return rep;
}

StructureCertificate certify_threshold_structure(const ProblemInstance& inst,
                                                 const DeterministicPolicy& policy,
                                                 const ValueTable& vt, double lambda, double slack) {
  const StateSpace& sp = vt.space;
  if (policy.space().num_states() != sp.num_states())
    throw ValidationError("policy and value table sizes differ");
  const ThresholdReport thr(inst, vt, lambda, slack);
  const auto j = state_action_cost(inst, vt, lambda);
  StructureCertificate cert;

  // Policy action at s is acceptable for `want` when equal or tied in J.
  auto expect = [&](std::size_t s, Action want, const char* name, CheckReport& rep) {
    ++rep.checked;
    const Action got = policy.at(s);
    if (got == want) return;
    const double gap = std::abs(j.at(s, got) - j.at(s, want));
    const AoiState a = sp.aoi_of(s);
    if (gap <= slack)
      ++cert.ties_resolved;
    else
      rep.violations.push_back({name, a.a_l, a.a_r, sp.channel_of(s), gap});
  };

  for (std::size_t h = 0; h < sp.num_channels(); ++h)
    for (Age a_l = 1; a_l <= sp.cap_l(); ++a_l)
      for (Age a_r = 1; a_r <= sp.cap_r(); ++a_r) {
        const std::size_t s = sp.index(a_l, a_r, h);
        if (thr.in_idle_region(a_l, a_r, h)) expect(s, kIdle, "A: idle region", cert.idle_region);
        if (a_r >= thr.psi_minus(kUpdate, a_l, h)) expect(s, kUpdate, "B: update above psi-", cert.update_region);
        if (a_l >= thr.phi_minus(kSample, a_r, h)) expect(s, kSample, "C: sample above phi-", cert.sample_region);
        if (a_r >= thr.psi_minus(kSampleUpdate, a_l, h))
          expect(s, kSampleUpdate, "D: sample-update above psi-", cert.sample_update);

        const Action w = policy.at(s);
        if ((w == kUpdate || w == kSampleUpdate) && a_r < sp.cap_r())
          expect(sp.index(a_l, a_r + 1, h), w, "implication along a_r", cert.implications);
        if (w == kSample && a_l < sp.cap_l())
          expect(sp.index(a_l + 1, a_r, h), w, "implication along a_l", cert.implications);
      }
  return cert;
}

SweepReport threshold_monotonicity_sweep(const ProblemInstance& base, SweepParameter parameter,
                                         std::vector<double> grid, double lambda, std::size_t h) {
  base.validate();
  if (h >= base.channel.size()) throw ValidationError("sweep channel index out of range");
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  std::sort(grid.begin(), grid.end());
  SweepReport rep{parameter, lambda, h, {}, {}};
  for (double value : grid) {
    if (!(value >= 0.0)) throw ValidationError("sweep costs must be non-negative");
    ProblemInstance inst = base;
    if (parameter == SweepParameter::sampling_cost) {
      inst.costs.c_s = value;
    } else {
      for (std::size_t i = 0; i < inst.channel.size(); ++i)
        inst.costs.c_u[i] = value / inst.channel.gain(i);
    }
    const auto sol = structure_aware_policy_iteration(inst, lambda);
    const ThresholdReport thr(inst, sol.values, lambda);
    SweepPoint pt{value, {}};
    if (parameter == SweepParameter::sampling_cost) {
      for (Age a_r = 1; a_r <= inst.cap_r; ++a_r) pt.threshold.push_back(thr.phi_minus(kSample, a_r, h));
    } else {
      for (Age a_l = 1; a_l <= inst.cap_l; ++a_l) pt.threshold.push_back(thr.psi_update_minus(a_l, h));
    }
    rep.points.push_back(std::move(pt));
  }
  const bool by_a_r = parameter == SweepParameter::sampling_cost;
  for (std::size_t p = 1; p < rep.points.size(); ++p)
    for (std::size_t i = 0; i < rep.points[p].threshold.size(); ++i) {
      ++rep.monotonicity.checked;
      const int before = rep.points[p - 1].threshold[i], after = rep.points[p].threshold[i];
      if (after < before) {
        const Age age = static_cast<Age>(i) + 1;
        rep.monotonicity.violations.push_back({"threshold decreases with cost", by_a_r ? 0 : age,
                                               by_a_r ? age : 0, h,
                                               static_cast<double>(before) - after});
      }
    }
  return rep;
}

CheckReport certify_channel_upset(const ProblemInstance& inst, const DeterministicPolicy& policy,
                                  const ValueTable& vt, double lambda,
                                  const std::vector<Age>& device_ages, double slack) {
  const StateSpace& sp = vt.space;
  const auto j = state_action_cost(inst, vt, lambda);
  std::vector<Age> ages = device_ages;
  if (ages.empty())
    for (Age a = 1; a <= sp.cap_l(); ++a) ages.push_back(a);
  CheckReport rep;
  const std::size_t nh = sp.num_channels();
  for (Age a_l : ages) {
    if (a_l < 1 || a_l > sp.cap_l()) throw ValidationError("device age out of range");
    for (Age a_r = 1; a_r <= sp.cap_r(); ++a_r) {
      ++rep.checked;
      // Which of u=0 / u=1 can be optimal at each channel index.
      std::vector<bool> can0(nh), can1(nh);
      for (std::size_t h = 0; h < nh; ++h) {
        const std::size_t s = sp.index(a_l, a_r, h);
        const double best = j.min_at(s);
        can0[h] = std::min(j.at(s, kIdle), j.at(s, kSample)) <= best + slack;
        can1[h] = std::min(j.at(s, kUpdate), j.at(s, kSampleUpdate)) <= best + slack;
        const bool u = policy.at(s).u;
        if (u ? !can1[h] : !can0[h])
          rep.violations.push_back({"policy action not optimal", a_l, a_r, h,
                                    j.at(s, policy.at(s)) - best});
      }
      std::size_t k = nh;
      while (k > 0 && can1[k - 1]) --k;
      for (std::size_t h = 0; h < k; ++h)
        if (!can0[h]) {
          rep.violations.push_back({"updating channels not an up-set", a_l, a_r, h, 1.0});
          break;
        }
    }
  }
  return rep;
}

}  // namespace aoi
