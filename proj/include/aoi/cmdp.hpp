#pragma once

// Constrained problem: minimize average destination AoI subject to an average
// energy budget, through the Lagrange multiplier and a two-policy mixture.

#include <map>
#include <optional>
#include <vector>

#include "aoi/mdp.hpp"

namespace aoi {

struct PolicyMetrics {
  double avg_aoi = 0.0;     // slots
  double avg_energy = 0.0;  // energy per slot
};

/// Exact long-run averages from the stationary distribution of the induced chain.
PolicyMetrics exact_policy_metrics(const ProblemInstance& inst, const DeterministicPolicy& policy);

/// Exact long-run averages when starting at (a_l, a_r) = (1, 1) with the first
/// channel drawn from the pmf. Also valid for policies with several recurrent classes.
PolicyMetrics policy_metrics_from_start(const ProblemInstance& inst, const DeterministicPolicy& policy);

/// Optimal unconstrained policy at one multiplier together with its exact metrics.
struct LagrangianSolution {
  double lambda = 0.0;
  DeterministicPolicy policy;
  double theta = 0.0;
  PolicyMetrics metrics;
};

/// Solves the Lagrangian MDP for many multipliers, warm-starting policy
/// iteration from the closest multiplier solved so far and caching metrics
/// per distinct policy.
class LagrangianSolver {
 public:
  explicit LagrangianSolver(ProblemInstance inst);

  const ProblemInstance& instance() const { return inst_; }
  LagrangianSolution solve(double lambda);
  std::size_t solves() const { return solves_; }

 private:
  ProblemInstance inst_;
  std::map<double, DeterministicPolicy> policies_;
  std::map<std::vector<std::uint8_t>, PolicyMetrics> metrics_;
  std::size_t solves_ = 0;
};

struct LambdaStep {
  int step = 0;
  double lambda = 0.0;
  double avg_energy = 0.0;
  double theta = 0.0;
};

enum class StepRule {
  harmonic,       // epsilon_m = 1/m
  sign_adaptive,  // epsilon_m = gain * 2^-k, k = sign changes of (C - c_max) so far
};

struct RobbinsMonroOptions {
  std::size_t max_steps = 5000;
  double stop_tolerance = 1e-6;  // on |lambda_{m+1} - lambda_m|
  /// Defaults to 100 * cap_r / c_max.
  std::optional<double> initial_lambda;
  StepRule rule = StepRule::sign_adaptive;
  /// Initial step for sign_adaptive. Defaults to initial_lambda / c_max.
  std::optional<double> gain;
};

struct RobbinsMonroResult {
  double lambda_star = 0.0;
  bool converged = false;
  std::vector<LambdaStep> trace;
};

/// lambda_{m+1} = [lambda_m + epsilon_m (C(pi*_{lambda_m}) - c_max)]^+ with the
/// average energy evaluated exactly at every step.
RobbinsMonroResult robbins_monro_lambda(LagrangianSolver& solver, double c_max,
                                        const RobbinsMonroOptions& opts = {});

/// lambda* = min{lambda : C(pi*_lambda) <= c_max} by bisection on the
/// monotone step function; independent cross-check of Robbins-Monro.
double bisection_lambda(LagrangianSolver& solver, double c_max, double tolerance = 1e-10);

/// Time-zero randomization: pi_1 with probability alpha, pi_2 otherwise.
struct MixturePolicy {
  DeterministicPolicy pi_1;
  DeterministicPolicy pi_2;
  double alpha = 1.0;
  double lambda_1 = 0.0;
  double lambda_2 = 0.0;
  double eta = 0.0;
  PolicyMetrics metrics_1;
  PolicyMetrics metrics_2;
};

/// Brackets the budget with pi*_{lambda*-eta} and pi*_{lambda*+eta}; eta is
/// multiplied by 10 while the two policies have the same energy.
MixturePolicy build_mixture(LagrangianSolver& solver, double lambda_star, double eta,
                            double c_max);

PolicyMetrics mixture_metrics(const MixturePolicy& mixture);

struct CmdpSolution {
  double lambda_star = 0.0;
  MixturePolicy mixture;
  PolicyMetrics metrics;
};

enum class MultiplierSearch { robbins_monro, bisection };

CmdpSolution solve_cmdp(LagrangianSolver& solver, double c_max,
                        MultiplierSearch search = MultiplierSearch::bisection,
                        double eta = 1e-3);

}  // namespace aoi
