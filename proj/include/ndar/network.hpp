#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ndar/errors.hpp"
#include "ndar/rng.hpp"

namespace ndar {

// Directed graph on {0..n-1}.  adj(i,j) = 1 means node i references node j,
// so row i lists the neighbors whose past values drive node i.  Every node
// must keep out-degree >= 1 or the row normalization below is undefined.
struct Network {
  int n = 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> adj;
  Eigen::VectorXi out_degree;
  std::vector<std::vector<int>> targets;  // sorted adjacency lists per row
  int repaired_nodes = 0;  // isolated nodes patched with one random edge
};

inline Network make_network(
    const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& adj) {
  if (adj.rows() != adj.cols())
    throw ParameterError("adjacency matrix must be square");
  const int n = static_cast<int>(adj.rows());
  if (n < 2) throw ParameterError("network needs at least two nodes");
  Network net;
  net.n = n;
  net.adj = adj;
  net.out_degree.resize(n);
  net.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    int deg = 0;
    for (int j = 0; j < n; ++j) {
      std::uint8_t a = adj(i, j);
      if (a != 0 && a != 1)
        throw ParameterError("adjacency entries must be 0 or 1");
      if (a == 0) continue;
      if (i == j) throw ParameterError("self loop at node " + std::to_string(i));
      net.targets[i].push_back(j);
      ++deg;
    }
    if (deg == 0)
      throw ParameterError("node " + std::to_string(i) +
                           " has out-degree 0; row normalization undefined");
    net.out_degree[i] = deg;
  }
  return net;
}

// (W v)_i, the mean of v over the nodes that i references.
template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> neighbor_average(
    const Network& net, const Eigen::Ref<const Eigen::Vector<Scalar, Eigen::Dynamic>>& v) {
  Eigen::Vector<Scalar, Eigen::Dynamic> out(net.n);
  for (int i = 0; i < net.n; ++i) {
    Scalar acc = Scalar(0);
    for (int j : net.targets[i]) acc += v[j];
    out[i] = acc / Scalar(net.out_degree[i]);
  }
  return out;
}

inline double density(const Network& net) {
  double edges = static_cast<double>(net.out_degree.sum());
  return edges / (static_cast<double>(net.n) * (net.n - 1));
}

inline Eigen::VectorXi in_degrees(const Network& net) {
  Eigen::VectorXi d = Eigen::VectorXi::Zero(net.n);
  for (int i = 0; i < net.n; ++i)
    for (int j : net.targets[i]) ++d[j];
  return d;
}

inline std::map<int, int> degree_histogram(const Eigen::VectorXi& deg) {
  std::map<int, int> hist;
  for (int i = 0; i < deg.size(); ++i) ++hist[deg[i]];
  return hist;
}

// --- generators ---------------------------------------------------------
// Draw order is fixed (node 0 first: degree, then its targets) so a seed
// pins the adjacency byte-for-byte.

// Out-degree uniform on {1..max_out_degree}; targets a simple random sample
// without replacement from the other nodes.
inline Network gen_uniform_random(int n, int max_out_degree, std::uint64_t seed) {
  if (n < 2) throw ParameterError("n must be at least 2");
  if (max_out_degree < 1 || max_out_degree > n - 1)
    throw ParameterError("max_out_degree must lie in [1, n-1]");
  Rng rng(seed);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> adj =
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int u = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_out_degree)));
    int placed = 0;
    while (placed < u) {
      int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      if (j >= i) ++j;  // skip self
      if (adj(i, j)) continue;
      adj(i, j) = 1;
      ++placed;
    }
  }
  Network net = make_network(adj);
  return net;
}

// Attractiveness v_j drawn from a discrete power law P(k) proportional to
// k^-gamma on {1..n} (inverse CDF); targets sampled without replacement
// with probability proportional to v_j.
inline Network gen_power_law(int n, int max_out_degree, double gamma,
                             std::uint64_t seed) {
  if (n < 2) throw ParameterError("n must be at least 2");
  if (max_out_degree < 1 || max_out_degree > n - 1)
    throw ParameterError("max_out_degree must lie in [1, n-1]");
  if (gamma <= 1.0) throw ParameterError("gamma must exceed 1");
  Rng rng(seed);

  std::vector<double> cdf(n);
  double acc = 0.0;
  for (int k = 1; k <= n; ++k) {
    acc += std::pow(static_cast<double>(k), -gamma);
    cdf[k - 1] = acc;
  }
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    v[i] = static_cast<double>((it - cdf.begin()) + 1);
  }

  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> adj =
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    int u = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_out_degree)));
    for (int j = 0; j < n; ++j) w[j] = v[j];
    w[i] = 0.0;
    double total = 0.0;
    for (double x : w) total += x;
    for (int d = 0; d < u; ++d) {
      double r = rng.uniform01() * total;
      double run = 0.0;
      int pick = -1;
      for (int j = 0; j < n; ++j) {
        if (w[j] == 0.0) continue;
        run += w[j];
        pick = j;
        if (r < run) break;
      }
      adj(i, pick) = 1;
      total -= w[pick];
      w[pick] = 0.0;
    }
  }
  return make_network(adj);
}

// Independent edge indicators: within-block probability p_within, between
// p_between; blocks split {0..n-1} into n_blocks contiguous groups as evenly
// as possible.  Pass a negative probability to get the defaults 28/n and
// 0.01/n.  Nodes left with out-degree 0 are repaired with one random edge
// and counted in repaired_nodes.
inline Network gen_stochastic_block(int n, int n_blocks, double p_within,
                                    double p_between, std::uint64_t seed) {
  if (n < 2) throw ParameterError("n must be at least 2");
  if (n_blocks < 1 || n_blocks > n)
    throw ParameterError("n_blocks must lie in [1, n]");
  if (p_within < 0) p_within = 28.0 / n;
  if (p_between < 0) p_between = 0.01 / n;
  if (p_within > 1 || p_between > 1)
    throw ParameterError("edge probabilities must not exceed 1");
  Rng rng(seed);
  auto block = [&](int i) {
    return static_cast<int>((static_cast<long long>(i) * n_blocks) / n);
  };
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> adj =
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double p = block(i) == block(j) ? p_within : p_between;
      if (rng.uniform01() < p) adj(i, j) = 1;
    }
  }
  int repaired = 0;
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int j = 0; j < n; ++j)
      if (adj(i, j)) { any = true; break; }
    if (!any) {
      int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      if (j >= i) ++j;
      adj(i, j) = 1;
      ++repaired;
    }
  }
  Network net = make_network(adj);
  net.repaired_nodes = repaired;
  return net;
}

}  // namespace ndar
