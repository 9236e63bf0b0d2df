#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "ndar/errors.hpp"
#include "ndar/network.hpp"
#include "ndar/panel.hpp"
#include "ndar/params.hpp"
#include "ndar/rng.hpp"

namespace ndar {

// Trajectories whose magnitude passes this guard abort the simulation; the
// recursion squares past values, so anything near 1e8 overflows soon after.
inline constexpr double divergence_guard = 1e8;

// Conditional mean and variance of y_t given the last m rows of history
// (oldest first, row m-1 is y_{t-1}).
template <class Scalar>
void conditional_moments(
    const Network& net, const NdarParams<Scalar>& params,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& history,
    Eigen::Vector<Scalar, Eigen::Dynamic>& mean,
    Eigen::Vector<Scalar, Eigen::Dynamic>& var) {
  params.validate();
  const int m = static_cast<int>(history.rows());
  if (m < params.max_lag())
    throw ParameterError("history shorter than the largest lag");
  if (history.cols() != net.n)
    throw ParameterError("history column count differs from network size");
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
  mean = Vec::Zero(net.n);
  var = Vec::Constant(net.n, params.omega);
  for (int r = 1; r <= params.p(); ++r) {
    Vec lag = history.row(m - r).transpose();
    Vec wlag = neighbor_average<Scalar>(net, lag);
    Vec wsq = neighbor_average<Scalar>(net, lag.array().square().matrix());
    mean += params.alpha[r - 1] * wlag;
    var += params.phi[r - 1] * wsq;
  }
  for (int r = 1; r <= params.q(); ++r) {
    Vec lag = history.row(m - r).transpose();
    mean += params.beta[r - 1] * lag;
    var += params.psi[r - 1] * lag.array().square().matrix();
  }
}

// One transition with a supplied innovation vector.
template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> simulate_step(
    const Network& net, const NdarParams<Scalar>& params,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& history,
    const Eigen::Ref<const Eigen::Vector<Scalar, Eigen::Dynamic>>& eta) {
  Eigen::Vector<Scalar, Eigen::Dynamic> mean, var;
  conditional_moments(net, params, history, mean, var);
  return mean.array() + var.array().sqrt() * eta.array();
}

// Simulate t_len observation rows after burn_in discarded steps.  The
// emitted presample holds the presample_rows rows immediately preceding the
// observations (default: the largest lag), so the panel is ready for
// likelihood work at the simulated orders.  The first max(p, q) states are
// i.i.d. N(0, omega).  Throws DivergenceError when the guard trips; the
// reported step counts generated rows, burn-in included.
template <class Scalar = double>
Panel<Scalar> simulate(const Network& net, const NdarParams<Scalar>& params,
                       InnovationLaw law, int t_len, int burn_in,
                       std::uint64_t seed, int presample_rows = -1) {
  params.validate();
  if (t_len < 1) throw ParameterError("t_len must be positive");
  const int m = params.max_lag();
  if (burn_in < m) throw ParameterError("burn_in must cover the largest lag");
  if (presample_rows < 0) presample_rows = m;
  if (presample_rows > m + burn_in)
    throw ParameterError("presample_rows exceeds generated history");

  const int n = net.n;
  const int steps = burn_in + t_len;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
  Mat y(n, m + steps);  // column s holds the state at generated row s

  Rng rng(seed);
  const Scalar sd0 = std::sqrt(params.omega);
  for (int s = 0; s < m; ++s)
    for (int i = 0; i < n; ++i) y(i, s) = sd0 * static_cast<Scalar>(rng.normal());

  Vec mean(n), var(n), eta(n), lag(n), wlag(n), wsq(n);
  for (int s = m; s < m + steps; ++s) {
    mean.setZero();
    var.setConstant(params.omega);
    for (int r = 1; r <= params.p(); ++r) {
      lag = y.col(s - r);
      wlag = neighbor_average<Scalar>(net, lag);
      wsq = neighbor_average<Scalar>(net, lag.array().square().matrix());
      mean += params.alpha[r - 1] * wlag;
      var += params.phi[r - 1] * wsq;
    }
    for (int r = 1; r <= params.q(); ++r) {
      lag = y.col(s - r);
      mean += params.beta[r - 1] * lag;
      var += params.psi[r - 1] * lag.array().square().matrix();
    }
    for (int i = 0; i < n; ++i) eta[i] = static_cast<Scalar>(rng.draw(law));
    y.col(s) = mean.array() + var.array().sqrt() * eta.array();
    Scalar peak = y.col(s).array().abs().maxCoeff();
    if (!(peak <= Scalar(divergence_guard)))
      throw DivergenceError(s - m + 1, "simulated trajectory diverged at step " +
                                           std::to_string(s - m + 1));
  }

  Panel<Scalar> panel;
  panel.pre = y.middleCols(m + burn_in - presample_rows, presample_rows)
                  .transpose();
  panel.obs = y.rightCols(t_len).transpose();
  return panel;
}

}  // namespace ndar
