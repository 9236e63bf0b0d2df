#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ndar/errors.hpp"
#include "ndar/network.hpp"
#include "ndar/panel.hpp"
#include "ndar/params.hpp"

namespace ndar {

// Neumaier-compensated accumulator; keeps the (i, t) reductions exact to
// well below the tolerances the derivative tests pin.
template <class Scalar>
struct Kahan {
  Scalar sum{0}, comp{0};
  void add(Scalar v) {
    Scalar t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  Scalar value() const { return sum + comp; }
};

// Lagged state shared by every likelihood quantity.  Node-major storage:
// column s of each matrix is the panel row s (presample first), so a time
// slice is contiguous.  Column s holds time t = s - m + 1; the lag r
// regressors for observation t live in column s - r.  One workspace serves
// every order pair with max(p, q) <= m, which order selection exploits.
template <class Scalar = double>
struct LagWorkspace {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Mat y;   // states
  Mat x;   // elementwise squares
  Mat wy;  // neighbor averages of y
  Mat wx;  // neighbor averages of x
  int m = 0, t_len = 0, n = 0;

  static LagWorkspace build(const Network& net, const Panel<Scalar>& panel) {
    panel.validate();
    if (panel.n() != net.n)
      throw ParameterError("panel and network disagree on node count");
    LagWorkspace ws;
    ws.m = panel.m();
    ws.t_len = panel.t_len();
    ws.n = panel.n();
    const int cols = ws.m + ws.t_len;
    ws.y = panel.stacked().transpose();
    ws.x = ws.y.array().square();
    ws.wy.resize(ws.n, cols);
    ws.wx.resize(ws.n, cols);
    for (int s = 0; s < cols; ++s) {
      for (int i = 0; i < ws.n; ++i) {
        Scalar ay = 0, ax = 0;
        for (int j : net.targets[i]) {
          ay += ws.y(j, s);
          ax += ws.x(j, s);
        }
        ws.wy(i, s) = ay / Scalar(net.out_degree[i]);
        ws.wx(i, s) = ax / Scalar(net.out_degree[i]);
      }
    }
    return ws;
  }
};

namespace detail {

template <class Scalar>
void check_orders(const LagWorkspace<Scalar>& ws, const NdarParams<Scalar>& th) {
  th.validate();
  if (th.max_lag() > ws.m)
    throw ParameterError("workspace presample shorter than the largest lag");
}

// Residual and conditional variance for observation t (0-based).
template <class Scalar>
void residual_variance(const LagWorkspace<Scalar>& ws, const NdarParams<Scalar>& th,
                       int t, Eigen::Vector<Scalar, Eigen::Dynamic>& eps,
                       Eigen::Vector<Scalar, Eigen::Dynamic>& h) {
  const int s = ws.m + t;
  eps = ws.y.col(s);
  h.setConstant(ws.n, th.omega);
  for (int r = 1; r <= th.p(); ++r) {
    eps.noalias() -= th.alpha[r - 1] * ws.wy.col(s - r);
    h.noalias() += th.phi[r - 1] * ws.wx.col(s - r);
  }
  for (int r = 1; r <= th.q(); ++r) {
    eps.noalias() -= th.beta[r - 1] * ws.y.col(s - r);
    h.noalias() += th.psi[r - 1] * ws.x.col(s - r);
  }
}

// Regressors for observation t: z1 columns are the p neighbor lags then the
// q own lags; z2 columns are the variance intercept, the p neighbor square
// lags, then the q own square lags.
template <class Scalar>
void gather_regressors(const LagWorkspace<Scalar>& ws, int p, int q, int t,
                       Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z1,
                       Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z2) {
  const int s = ws.m + t;
  z1.resize(ws.n, p + q);
  z2.resize(ws.n, p + q + 1);
  z2.col(0).setOnes();
  for (int r = 1; r <= p; ++r) {
    z1.col(r - 1) = ws.wy.col(s - r);
    z2.col(r) = ws.wx.col(s - r);
  }
  for (int r = 1; r <= q; ++r) {
    z1.col(p + r - 1) = ws.y.col(s - r);
    z2.col(p + r) = ws.x.col(s - r);
  }
}

}  // namespace detail

// Gaussian quasi log-likelihood, totalled (not averaged) over nodes and
// observations: sum_t sum_i -(log h_it + eps_it^2 / h_it) / 2.
template <class Scalar>
Scalar loglik(const LagWorkspace<Scalar>& ws, const NdarParams<Scalar>& th) {
  detail::check_orders(ws, th);
  Eigen::Vector<Scalar, Eigen::Dynamic> eps(ws.n), h(ws.n);
  Kahan<Scalar> acc;
  for (int t = 0; t < ws.t_len; ++t) {
    detail::residual_variance(ws, th, t, eps, h);
    acc.add((h.array().log() + eps.array().square() / h.array()).sum());
  }
  return Scalar(-0.5) * acc.value();
}

// Log-likelihood and its gradient in packed order.  Analytic pieces:
//   d/d mu    =  (eps / h) z1
//   d/d sigma =  ((eps^2/h - 1) / (2h)) z2
// accumulated per observation in extended precision.
template <class Scalar>
Scalar loglik_score(const LagWorkspace<Scalar>& ws, const NdarParams<Scalar>& th,
                    Eigen::Vector<Scalar, Eigen::Dynamic>& grad) {
  detail::check_orders(ws, th);
  const int p = th.p(), q = th.q(), d = th.dim();
  Eigen::Vector<Scalar, Eigen::Dynamic> eps(ws.n), h(ws.n), w1(ws.n), w2(ws.n);
  Eigen::Vector<long double, Eigen::Dynamic> acc =
      Eigen::Vector<long double, Eigen::Dynamic>::Zero(d);
  Kahan<Scalar> ll;
  for (int t = 0; t < ws.t_len; ++t) {
    const int s = ws.m + t;
    detail::residual_variance(ws, th, t, eps, h);
    ll.add((h.array().log() + eps.array().square() / h.array()).sum());
    w1 = eps.array() / h.array();
    w2 = (eps.array() * w1.array() - Scalar(1)) / (Scalar(2) * h.array());
    for (int r = 1; r <= p; ++r) {
      acc[r - 1] += static_cast<long double>(w1.dot(ws.wy.col(s - r)));
      acc[p + q + r] += static_cast<long double>(w2.dot(ws.wx.col(s - r)));
    }
    for (int r = 1; r <= q; ++r) {
      acc[p + r - 1] += static_cast<long double>(w1.dot(ws.y.col(s - r)));
      acc[2 * p + q + r] += static_cast<long double>(w2.dot(ws.x.col(s - r)));
    }
    acc[p + q] += static_cast<long double>(w2.sum());
  }
  grad.resize(d);
  for (int k = 0; k < d; ++k) grad[k] = static_cast<Scalar>(acc[k]);
  return Scalar(-0.5) * ll.value();
}

template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> score(const LagWorkspace<Scalar>& ws,
                                            const NdarParams<Scalar>& th) {
  Eigen::Vector<Scalar, Eigen::Dynamic> grad;
  loglik_score(ws, th, grad);
  return grad;
}

// Analytic Hessian in packed order.  Blocks per observation:
//   mu mu':       -z1 z1' / h
//   mu sigma':    -(eps / h^2) z1 z2'
//   sigma sigma':  (1/2 - eps^2/h) / h^2 * z2 z2'
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hessian(
    const LagWorkspace<Scalar>& ws, const NdarParams<Scalar>& th) {
  detail::check_orders(ws, th);
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
  const int p = th.p(), q = th.q();
  const int d1 = p + q, d2 = p + q + 1, d = th.dim();
  Vec eps(ws.n), h(ws.n), w(ws.n);
  Mat z1, z2, zw1(ws.n, d1), zw2(ws.n, d2);
  Mat h11 = Mat::Zero(d1, d1), h12 = Mat::Zero(d1, d2), h22 = Mat::Zero(d2, d2);
  for (int t = 0; t < ws.t_len; ++t) {
    detail::residual_variance(ws, th, t, eps, h);
    detail::gather_regressors(ws, p, q, t, z1, z2);
    if (d1 > 0) {
      zw1 = z1.array().colwise() / h.array();
      h11.noalias() -= z1.transpose() * zw1;
      w = eps.array() / h.array().square();
      zw2 = z2.array().colwise() * w.array();
      h12.noalias() -= z1.transpose() * zw2;
    }
    w = (Scalar(0.5) - eps.array().square() / h.array()) / h.array().square();
    zw2 = z2.array().colwise() * w.array();
    h22.noalias() += z2.transpose() * zw2;
  }
  Mat out(d, d);
  out.topLeftCorner(d1, d1) = h11;
  out.topRightCorner(d1, d2) = h12;
  out.bottomLeftCorner(d2, d1) = h12.transpose();
  out.bottomRightCorner(d2, d2) = h22;
  // the accumulated blocks are symmetric only up to rounding
  return Scalar(0.5) * (out + out.transpose());
}

}  // namespace ndar
