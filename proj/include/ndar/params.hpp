#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ndar/errors.hpp"

namespace ndar {

// Model coefficients for lag orders (p, q).  Packed layout, used everywhere
// a flat vector is needed:
//   theta = (alpha_1..alpha_p, beta_1..beta_q, omega, phi_1..phi_p,
//            psi_1..psi_q),  dimension 2p + 2q + 1.
// alpha/phi weight the network-averaged lags, beta/psi the own lags; omega
// is the variance intercept.  Feasible set: omega > 0, phi >= 0, psi >= 0.
template <class Scalar = double>
struct NdarParams {
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;

  Vec alpha{0}, beta{0};
  Scalar omega{1};
  Vec phi{0}, psi{0};

  int p() const { return static_cast<int>(alpha.size()); }
  int q() const { return static_cast<int>(beta.size()); }
  int dim() const { return 2 * p() + 2 * q() + 1; }
  int max_lag() const { return std::max(p(), q()); }

  void validate() const {
    if (phi.size() != alpha.size())
      throw ParameterError("alpha and phi must share length p");
    if (psi.size() != beta.size())
      throw ParameterError("beta and psi must share length q");
    if (!(omega > Scalar(0))) throw ParameterError("omega must be positive");
    for (int r = 0; r < phi.size(); ++r)
      if (phi[r] < Scalar(0)) throw ParameterError("phi must be nonnegative");
    for (int r = 0; r < psi.size(); ++r)
      if (psi[r] < Scalar(0)) throw ParameterError("psi must be nonnegative");
  }

  Vec pack() const {
    Vec theta(dim());
    int k = 0;
    for (int r = 0; r < p(); ++r) theta[k++] = alpha[r];
    for (int r = 0; r < q(); ++r) theta[k++] = beta[r];
    theta[k++] = omega;
    for (int r = 0; r < p(); ++r) theta[k++] = phi[r];
    for (int r = 0; r < q(); ++r) theta[k++] = psi[r];
    return theta;
  }

  static NdarParams unpack(int p, int q, const Eigen::Ref<const Vec>& theta) {
    if (p < 0 || q < 0) throw ParameterError("lag orders must be nonnegative");
    if (theta.size() != 2 * p + 2 * q + 1)
      throw ParameterError("theta has wrong length for orders (p, q)");
    NdarParams out;
    out.alpha = theta.segment(0, p);
    out.beta = theta.segment(p, q);
    out.omega = theta[p + q];
    out.phi = theta.segment(p + q + 1, p);
    out.psi = theta.segment(2 * p + q + 1, q);
    return out;
  }

  // Zero-padded copy at larger orders; the padded model evaluates to the
  // same process, which order selection relies on for warm starts.
  NdarParams embedded(int p2, int q2) const {
    if (p2 < p() || q2 < q())
      throw ParameterError("embedding target orders must not shrink");
    NdarParams out;
    out.alpha = Vec::Zero(p2);
    out.beta = Vec::Zero(q2);
    out.phi = Vec::Zero(p2);
    out.psi = Vec::Zero(q2);
    out.alpha.head(p()) = alpha;
    out.beta.head(q()) = beta;
    out.phi.head(p()) = phi;
    out.psi.head(q()) = psi;
    out.omega = omega;
    return out;
  }
};

inline std::vector<std::string> param_names(int p, int q) {
  std::vector<std::string> names;
  names.reserve(2 * p + 2 * q + 1);
  for (int r = 1; r <= p; ++r) names.push_back("alpha" + std::to_string(r));
  for (int r = 1; r <= q; ++r) names.push_back("beta" + std::to_string(r));
  names.push_back("omega");
  for (int r = 1; r <= p; ++r) names.push_back("phi" + std::to_string(r));
  for (int r = 1; r <= q; ++r) names.push_back("psi" + std::to_string(r));
  return names;
}

}  // namespace ndar
