#include "aoi/markov.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aoi/model.hpp"

namespace aoi {

namespace {

constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();

// Iterative Tarjan; returns the component id of every node and the count.
std::vector<std::uint32_t> strongly_connected(const SparseChain& chain, std::uint32_t& count) {
  const std::size_t n = chain.size();
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<std::uint32_t> stack;
  std::vector<bool> on_stack(n, false);
  struct Frame {
    std::uint32_t node;
    std::size_t edge;
  };
  std::vector<Frame> frames;
  std::uint32_t next_index = 0;
  count = 0;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto cols = chain.cols(f.node);
      if (f.edge < cols.size()) {
        const std::uint32_t next = cols[f.edge++];
        if (index[next] == kUnvisited) {
          index[next] = low[next] = next_index++;
          stack.push_back(next);
          on_stack[next] = true;
          frames.push_back({next, 0});
        } else if (on_stack[next]) {
          low[f.node] = std::min(low[f.node], index[next]);
        }
        continue;
      }
      const std::uint32_t v = f.node;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[v]);
      if (low[v] == index[v]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
    }
  }
  return comp;
}

using SpMat = Eigen::SparseMatrix<double>;

Eigen::VectorXd sparse_solve(SpMat& m, const Eigen::VectorXd& rhs) {
  m.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse LU factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("sparse LU solve failed");
  return x;
}

}  // namespace

std::vector<std::vector<std::uint32_t>> recurrent_classes(const SparseChain& chain) {
  std::uint32_t count = 0;
  const auto comp = strongly_connected(chain, count);
  std::vector<bool> closed(count, true);
  for (std::size_t s = 0; s < chain.size(); ++s)
    for (std::uint32_t t : chain.cols(s))
      if (comp[t] != comp[s]) closed[comp[s]] = false;
  std::vector<std::uint32_t> class_id(count, kUnvisited);
  std::vector<std::vector<std::uint32_t>> out;
  for (std::uint32_t s = 0; s < chain.size(); ++s) {
    const std::uint32_t c = comp[s];
    if (!closed[c]) continue;
    if (class_id[c] == kUnvisited) {
      class_id[c] = static_cast<std::uint32_t>(out.size());
      out.emplace_back();
    }
    out[class_id[c]].push_back(s);
  }
  return out;
}

void require_unichain(const SparseChain& chain) {
  const auto classes = recurrent_classes(chain);
  if (classes.size() != 1)
    throw NumericalError("policy is not unichain: " + std::to_string(classes.size()) +
                         " recurrent classes");
}

std::vector<double> stationary_distribution(const SparseChain& chain, std::size_t direct_limit) {
  if (!chain.complete()) throw ValidationError("chain is incomplete");
  const auto classes = recurrent_classes(chain);
  if (classes.size() != 1)
    throw NumericalError("policy is not unichain: " + std::to_string(classes.size()) +
                         " recurrent classes");
  const std::size_t n = chain.size();
  std::vector<double> pi(n, 0.0);

  if (n <= direct_limit) {
    // (I - P)^T pi = 0 with the row of a recurrent state replaced by sum(pi) = 1.
    const std::uint32_t anchor = classes.front().front();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * n + n * 4);
    for (std::uint32_t s = 0; s < n; ++s) {
      if (s != anchor) trip.emplace_back(s, s, 1.0);
      const auto cols = chain.cols(s);
      const auto probs = chain.probs(s);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (cols[k] != anchor) trip.emplace_back(cols[k], s, -probs[k]);
    }
    for (std::uint32_t s = 0; s < n; ++s) trip.emplace_back(anchor, s, 1.0);
    SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    rhs[anchor] = 1.0;
    const Eigen::VectorXd x = sparse_solve(m, rhs);
    for (std::size_t s = 0; s < n; ++s) pi[s] = std::max(0.0, x[static_cast<Eigen::Index>(s)]);
  } else {
    // Lazy chain (I + P) / 2 shares the stationary law and is aperiodic.
    for (std::uint32_t s : classes.front()) pi[s] = 1.0 / static_cast<double>(classes.front().size());
    std::vector<double> next(n);
    for (int it = 0; it < 10'000'000; ++it) {
      for (std::size_t s = 0; s < n; ++s) next[s] = 0.5 * pi[s];
      for (std::size_t s = 0; s < n; ++s) {
        if (pi[s] == 0.0) continue;
        const auto cols = chain.cols(s);
        const auto probs = chain.probs(s);
        for (std::size_t k = 0; k < cols.size(); ++k) next[cols[k]] += 0.5 * pi[s] * probs[k];
      }
      double diff = 0.0;
      for (std::size_t s = 0; s < n; ++s) diff += std::abs(next[s] - pi[s]);
      pi.swap(next);
      if (diff < 1e-14) break;
    }
  }
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;
  return pi;
}

PoissonSolution solve_poisson(const SparseChain& chain, std::span<const double> cost,
                              std::size_t reference, std::size_t direct_limit) {
  require_unichain(chain);
  const std::size_t n = chain.size();
  if (cost.size() != n || reference >= n) throw ValidationError("poisson: size mismatch");
  PoissonSolution sol;
  sol.bias.assign(n, 0.0);

  if (n <= direct_limit) {
    // Unknown vector y: y[reference] holds the gain, y[s] the bias otherwise.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * 6);
    for (std::uint32_t s = 0; s < n; ++s) {
      trip.emplace_back(s, reference, 1.0);
      if (s != reference) trip.emplace_back(s, s, 1.0);
      const auto cols = chain.cols(s);
      const auto probs = chain.probs(s);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (cols[k] != reference) trip.emplace_back(s, cols[k], -probs[k]);
    }
    SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) rhs[static_cast<Eigen::Index>(s)] = cost[s];
    const Eigen::VectorXd y = sparse_solve(m, rhs);
    sol.gain = y[static_cast<Eigen::Index>(reference)];
    for (std::size_t s = 0; s < n; ++s)
      if (s != reference) sol.bias[s] = y[static_cast<Eigen::Index>(s)];
    return sol;
  }

  // Relative value iteration on the lazy chain.
  std::vector<double> next(n);
  for (int it = 0; it < 10'000'000; ++it) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = 0; s < n; ++s) {
      double acc = cost[s];
      const auto cols = chain.cols(s);
      const auto probs = chain.probs(s);
      for (std::size_t k = 0; k < cols.size(); ++k) acc += probs[k] * sol.bias[cols[k]];
      const double d = acc - sol.bias[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      next[s] = sol.bias[s] + 0.5 * d;
    }
    const double shift = next[reference];
    for (std::size_t s = 0; s < n; ++s) sol.bias[s] = next[s] - shift;
    sol.gain = 0.5 * (lo + hi);
    if (hi - lo < 1e-11) return sol;
  }
  throw NumericalError("poisson: iterative solve did not converge");
}

}  // namespace aoi

namespace aoi {

MultichainSolution solve_multichain(const SparseChain& chain, std::span<const double> cost) {
  const std::size_t n = chain.size();
  if (cost.size() != n) throw ValidationError("multichain: size mismatch");
  const auto classes = recurrent_classes(chain);
  MultichainSolution out;
  out.num_classes = classes.size();
  out.gain.assign(n, 0.0);
  out.bias.assign(n, 0.0);

  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> local(n, kNone);
  std::vector<bool> recurrent(n, false);

  for (const auto& cls : classes) {
    for (std::uint32_t i = 0; i < cls.size(); ++i) {
      local[cls[i]] = i;
      recurrent[cls[i]] = true;
    }
    SparseChain sub(cls.size());
    std::vector<double> c(cls.size());
    for (std::uint32_t i = 0; i < cls.size(); ++i) {
      const auto cols = chain.cols(cls[i]);
      const auto probs = chain.probs(cls[i]);
      for (std::size_t k = 0; k < cols.size(); ++k) sub.add(local[cols[k]], probs[k]);
      sub.end_row();
      c[i] = cost[cls[i]];
    }
    const auto pi = stationary_distribution(sub);
    const auto sol = solve_poisson(sub, c, 0);
    double mean_bias = 0.0;
    for (std::size_t i = 0; i < cls.size(); ++i) mean_bias += pi[i] * sol.bias[i];
    for (std::size_t i = 0; i < cls.size(); ++i) {
      out.gain[cls[i]] = sol.gain;
      out.bias[cls[i]] = sol.bias[i] - mean_bias;
    }
  }

  std::vector<std::uint32_t> transient;
  for (std::uint32_t s = 0; s < n; ++s)
    if (!recurrent[s]) {
      local[s] = static_cast<std::uint32_t>(transient.size());
      transient.push_back(s);
    }
  if (transient.empty()) return out;

  const auto m = static_cast<Eigen::Index>(transient.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
  for (std::uint32_t i = 0; i < transient.size(); ++i) {
    const std::uint32_t s = transient[i];
    trip.emplace_back(i, i, 1.0);
    const auto cols = chain.cols(s);
    const auto probs = chain.probs(s);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (recurrent[cols[k]]) {
        rhs(i, 0) += probs[k] * out.gain[cols[k]];
        rhs(i, 1) += probs[k] * out.bias[cols[k]];
      } else {
        trip.emplace_back(i, local[cols[k]], -probs[k]);
      }
    }
  }
  SpMat a(m, m);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("multichain: transient block is singular");
  const Eigen::VectorXd g = lu.solve(Eigen::VectorXd(rhs.col(0)));
  Eigen::VectorXd hr = rhs.col(1);
  for (std::uint32_t i = 0; i < transient.size(); ++i) hr[i] += cost[transient[i]] - g[i];
  const Eigen::VectorXd h = lu.solve(hr);
  for (std::uint32_t i = 0; i < transient.size(); ++i) {
    out.gain[transient[i]] = g[i];
    out.bias[transient[i]] = h[i];
  }
  return out;
}

}  // namespace aoi
