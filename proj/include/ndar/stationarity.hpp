#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ndar/network.hpp"
#include "ndar/params.hpp"
#include "ndar/rng.hpp"

namespace ndar {

// Per-node load of the sufficient stationarity condition.  For column j,
//   load_j = sum_r |alpha_r| * (sum_i a_ij / n_i)
//          + sum_r |beta_r|
//          + E|eta| * [ sum_r sqrt(phi_r) * (sum_i a_ij / sqrt(n_i))
//                       + sum_r sqrt(psi_r) ].
// max_j load_j < 1 guarantees a strictly stationary solution.  The bound is
// sufficient only and conservative at columns with many followers; stable
// processes routinely exceed it on sampled graphs.
template <class Scalar>
Eigen::VectorXd stationarity_load(const Network& net,
                                  const NdarParams<Scalar>& params,
                                  InnovationLaw law) {
  params.validate();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(net.n);  // column sums of a_ij/n_i
  Eigen::VectorXd d = Eigen::VectorXd::Zero(net.n);  // column sums of a_ij/sqrt(n_i)
  for (int i = 0; i < net.n; ++i) {
    double inv = 1.0 / net.out_degree[i];
    double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(net.out_degree[i]));
    for (int j : net.targets[i]) {
      c[j] += inv;
      d[j] += inv_sqrt;
    }
  }
  double sum_abs_alpha = 0, sum_abs_beta = 0, sum_sqrt_phi = 0, sum_sqrt_psi = 0;
  for (int r = 0; r < params.alpha.size(); ++r)
    sum_abs_alpha += std::abs(static_cast<double>(params.alpha[r]));
  for (int r = 0; r < params.beta.size(); ++r)
    sum_abs_beta += std::abs(static_cast<double>(params.beta[r]));
  for (int r = 0; r < params.phi.size(); ++r)
    sum_sqrt_phi += std::sqrt(static_cast<double>(params.phi[r]));
  for (int r = 0; r < params.psi.size(); ++r)
    sum_sqrt_psi += std::sqrt(static_cast<double>(params.psi[r]));
  double e_abs = mean_abs_innovation(law);
  return (sum_abs_alpha * c).array() + sum_abs_beta +
         e_abs * (sum_sqrt_phi * d.array() + sum_sqrt_psi);
}

template <class Scalar>
double stationarity_margin(const Network& net, const NdarParams<Scalar>& params,
                           InnovationLaw law) {
  return stationarity_load(net, params, law).maxCoeff();
}

}  // namespace ndar
