#pragma once

// Finite Markov chains induced by stationary policies: recurrent-class
// detection, stationary distributions and the average-cost Poisson equation.

#include <cstdint>
#include <span>
#include <vector>

namespace aoi {

/// Row-compressed transition matrix.
class SparseChain {
 public:
  explicit SparseChain(std::size_t n = 0) : n_(n) { row_ptr_.push_back(0); }

  /// Rows must be appended in order 0..n-1. Zero probabilities are dropped.
  void add(std::uint32_t col, double p) {
    if (p > 0.0) {
      col_.push_back(col);
      prob_.push_back(p);
    }
  }
  void end_row() { row_ptr_.push_back(col_.size()); }

  std::size_t size() const { return n_; }
  bool complete() const { return row_ptr_.size() == n_ + 1; }
  std::span<const std::uint32_t> cols(std::size_t row) const {
    return {col_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }
  std::span<const double> probs(std::size_t row) const {
    return {prob_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> prob_;
};

/// Closed communicating classes (bottom strongly connected components).
std::vector<std::vector<std::uint32_t>> recurrent_classes(const SparseChain& chain);

/// Throws NumericalError naming the class count when the chain is not unichain.
void require_unichain(const SparseChain& chain);

/// Exact stationary distribution of a unichain chain. Direct sparse LU up to
/// `direct_limit` states, lazy power iteration above.
std::vector<double> stationary_distribution(const SparseChain& chain,
                                            std::size_t direct_limit = 20000);

struct PoissonSolution {
  double gain = 0.0;
  std::vector<double> bias;  // bias[reference] == 0
};

/// Solves gain + bias(s) = cost(s) + sum_s' P(s, s') bias(s'), bias(reference) = 0.
PoissonSolution solve_poisson(const SparseChain& chain, std::span<const double> cost,
                              std::size_t reference, std::size_t direct_limit = 20000);

/// Gain and bias of an arbitrary (possibly multichain) chain:
/// (I - P) gain = 0, gain + (I - P) bias = cost, with the bias averaging to
/// zero under the stationary law of every recurrent class.
struct MultichainSolution {
  std::vector<double> gain;
  std::vector<double> bias;
  std::size_t num_classes = 0;
};
MultichainSolution solve_multichain(const SparseChain& chain, std::span<const double> cost);

}  // namespace aoi
