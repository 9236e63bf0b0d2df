#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ndar/errors.hpp"
#include "ndar/likelihood.hpp"

namespace ndar {

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

// Wichura's AS 241 rational approximations, accurate to ~1e-15.
inline double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw ParameterError("quantile probability must lie strictly in (0, 1)");
  const double q = prob - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

struct FitConfig {
  int max_iterations = 300;
  // converged when ||projected gradient||_inf <= grad_tol * (1 + |loglik|)
  double grad_tol = 1e-7;
  double omega_floor = 1e-10;
  double mean_bound = 10.0;  // |alpha|, |beta| box half-width
  double sigma_cap = 1e8;    // upper bound for omega, phi, psi
  int multistart = 1;
  bool polish = true;  // Newton refinement on the free coordinates
  bool compute_inference = true;
  enum class Init { least_squares, given };
  Init init = Init::least_squares;
  std::optional<Eigen::VectorXd> start;
};

struct FitResult {
  int p = 0, q = 0;
  int n = 0, t_len = 0;
  std::vector<std::string> names;
  Eigen::VectorXd theta;  // packed (alpha, beta, omega, phi, psi)
  double loglik = 0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0;  // final ||projected gradient||_inf
  Eigen::MatrixXd covariance;  // sandwich, already scaled by 1/(n t_len)
  Eigen::VectorXd std_errors, z_values, p_values;
  Eigen::Matrix2d d_hat = Eigen::Matrix2d::Identity();

  NdarParams<double> params() const {
    return NdarParams<double>::unpack(p, q, theta);
  }
};

// Pieces of the robust covariance
//   cov = Omega^-1 Sigma Omega^-1 / (n t_len)
// where Omega averages the outer products of the scaled regressor blocks and
// Sigma additionally weights them with the innovation moment matrix D.
struct SandwichParts {
  Eigen::MatrixXd omega_hat, sigma_hat, cov;
  Eigen::Matrix2d d_hat;
  double condition = 0;
};

inline SandwichParts sandwich_covariance(const LagWorkspace<double>& ws,
                                         const NdarParams<double>& th,
                                         const Eigen::Matrix2d* d_override = nullptr) {
  detail::check_orders(ws, th);
  using Mat = Eigen::MatrixXd;
  using Vec = Eigen::VectorXd;
  const int p = th.p(), q = th.q();
  const int d1 = p + q, d2 = p + q + 1, d = th.dim();
  Vec eps(ws.n), h(ws.n), w(ws.n), sres(ws.n);
  Mat z1, z2, zw(ws.n, d2);
  Mat s11 = Mat::Zero(d1, d1), s12 = Mat::Zero(d1, d2), s22 = Mat::Zero(d2, d2);
  Kahan<double> k3acc, k4acc;
  for (int t = 0; t < ws.t_len; ++t) {
    detail::residual_variance(ws, th, t, eps, h);
    detail::gather_regressors(ws, p, q, t, z1, z2);
    if (d1 > 0) {
      zw.leftCols(d1) = z1.array().colwise() / h.array();
      s11.noalias() += z1.transpose() * zw.leftCols(d1);
      w = h.array() * h.array().sqrt();  // h^{3/2}
      zw = z2.array().colwise() / w.array();
      s12.noalias() += z1.transpose() * zw;
    }
    w = h.array().square();
    zw = z2.array().colwise() / w.array();
    s22.noalias() += z2.transpose() * zw;
    sres = eps.array() / h.array().sqrt();
    k3acc.add(sres.array().cube().sum());
    k4acc.add(sres.array().square().square().sum());
  }
  const double nt = static_cast<double>(ws.n) * ws.t_len;
  s11 /= nt;
  s12 /= nt;
  s22 /= nt;
  const double k3 = k3acc.value() / nt;
  const double k4 = k4acc.value() / nt;

  SandwichParts parts;
  if (d_override) {
    parts.d_hat = *d_override;
  } else {
    parts.d_hat << 1.0, k3 / std::sqrt(2.0), k3 / std::sqrt(2.0), (k4 - 1.0) / 2.0;
  }
  const double d11 = parts.d_hat(0, 0);
  const double d12 = parts.d_hat(0, 1);
  const double d22 = parts.d_hat(1, 1);

  Mat omega = Mat::Zero(d, d), sigma = Mat::Zero(d, d);
  omega.topLeftCorner(d1, d1) = s11;
  omega.bottomRightCorner(d2, d2) = 0.5 * s22;
  sigma.topLeftCorner(d1, d1) = d11 * s11;
  sigma.topRightCorner(d1, d2) = (d12 / std::sqrt(2.0)) * s12;
  sigma.bottomLeftCorner(d2, d1) = sigma.topRightCorner(d1, d2).transpose();
  sigma.bottomRightCorner(d2, d2) = (0.5 * d22) * s22;

  Eigen::SelfAdjointEigenSolver<Mat> es(omega);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  parts.condition = (lmin > 0.0) ? lmax / lmin
                                 : std::numeric_limits<double>::infinity();
  if (!(lmin > 0.0) || parts.condition > 1e12)
    throw SingularInformationError(
        "information matrix numerically singular (condition " +
        std::to_string(parts.condition) + ")");

  Eigen::LDLT<Mat> ldlt(omega);
  Mat half = ldlt.solve(sigma);                    // Omega^-1 Sigma
  Mat cov = ldlt.solve(half.transpose()).transpose();  // ... Omega^-1
  cov = (0.5 * (cov + cov.transpose()) / nt).eval();

  parts.omega_hat = std::move(omega);
  parts.sigma_hat = std::move(sigma);
  parts.cov = std::move(cov);
  return parts;
}

// Wald table: two-sided p for the mean block, one-sided (H1: positive) for
// the variance block, whose parameters live on or near the boundary.
inline void wald_inference(FitResult& fit) {
  const int d = static_cast<int>(fit.theta.size());
  const int d1 = fit.p + fit.q;
  fit.z_values.resize(d);
  fit.p_values.resize(d);
  for (int k = 0; k < d; ++k) {
    const double se = fit.std_errors[k];
    if (!(se > 0.0))
      throw DegenerateInferenceError("zero standard error for " + fit.names[k]);
    const double z = fit.theta[k] / se;
    fit.z_values[k] = z;
    fit.p_values[k] = k < d1 ? std::erfc(std::abs(z) * 0.70710678118654752440)
                             : 1.0 - normal_cdf(z);
  }
}

// Symmetric normal intervals per coordinate; a zero standard error yields
// the degenerate point interval rather than an error.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> confidence_intervals(
    const FitResult& fit, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ParameterError("confidence level must lie strictly in (0, 1)");
  const double zstar = normal_quantile(0.5 + level / 2.0);
  Eigen::VectorXd lo = fit.theta - zstar * fit.std_errors;
  Eigen::VectorXd hi = fit.theta + zstar * fit.std_errors;
  return {lo, hi};
}

namespace detail {

struct Box {
  Eigen::VectorXd lo, hi;
};

inline Box make_box(int p, int q, const FitConfig& cfg) {
  const int d1 = p + q, d = 2 * p + 2 * q + 1;
  Box box;
  box.lo.resize(d);
  box.hi.resize(d);
  box.lo.head(d1).setConstant(-cfg.mean_bound);
  box.hi.head(d1).setConstant(cfg.mean_bound);
  box.lo[d1] = cfg.omega_floor;
  box.lo.tail(d - d1 - 1).setConstant(0.0);
  box.hi.tail(d - d1).setConstant(cfg.sigma_cap);
  return box;
}

inline Eigen::VectorXd clip(const Eigen::VectorXd& x, const Box& box) {
  return x.cwiseMax(box.lo).cwiseMin(box.hi);
}

inline Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& g,
                                          const Box& box) {
  Eigen::VectorXd pg = g;
  for (int k = 0; k < x.size(); ++k) {
    if (x[k] <= box.lo[k] && g[k] > 0.0) pg[k] = 0.0;
    if (x[k] >= box.hi[k] && g[k] < 0.0) pg[k] = 0.0;
  }
  return pg;
}

// Least-squares start: regress y on the mean regressors, take the residual
// mean square as omega, and open the variance slopes slightly.
inline Eigen::VectorXd least_squares_start(const LagWorkspace<double>& ws,
                                           int p, int q, const FitConfig& cfg) {
  using Mat = Eigen::MatrixXd;
  using Vec = Eigen::VectorXd;
  const int d1 = p + q, d = 2 * p + 2 * q + 1;
  Mat a = Mat::Zero(d1, d1);
  Vec b = Vec::Zero(d1);
  double sst = 0.0;
  Mat z1, z2;
  for (int t = 0; t < ws.t_len; ++t) {
    gather_regressors(ws, p, q, t, z1, z2);
    const auto yt = ws.y.col(ws.m + t);
    if (d1 > 0) {
      a.noalias() += z1.transpose() * z1;
      b.noalias() += z1.transpose() * yt;
    }
    sst += yt.squaredNorm();
  }
  Vec theta = Vec::Zero(d);
  double rss = sst;
  if (d1 > 0) {
    a.diagonal().array() += 1e-12 * (1.0 + a.trace() / d1);
    Vec mu = a.ldlt().solve(b);
    theta.head(d1) = mu;
    rss = sst - 2.0 * mu.dot(b) + mu.dot(a * mu);
  }
  const double nt = static_cast<double>(ws.n) * ws.t_len;
  theta[d1] = std::max(rss / nt, 1e-8);
  theta.tail(d - d1 - 1).setConstant(0.01);
  return theta;
}

struct SolveOutcome {
  Eigen::VectorXd x, grad;
  double f = 0;
  bool converged = false;
  int iterations = 0;
  double pg_norm = 0;
};

// Projected BFGS with backtracking, then Newton polish on the free set.
template <class Objective>
SolveOutcome solve_box(const Objective& obj, const Eigen::VectorXd& start,
                       const Box& box, const FitConfig& cfg) {
  using Mat = Eigen::MatrixXd;
  using Vec = Eigen::VectorXd;
  const int d = static_cast<int>(start.size());

  SolveOutcome out;
  Vec x = clip(start, box);
  Vec g(d), gn(d);
  double f = obj.eval(x, g);
  Mat hinv = Mat::Identity(d, d) / std::max(1.0, g.lpNorm<Eigen::Infinity>());

  auto tol_at = [&](double fv) { return cfg.grad_tol * (1.0 + std::abs(fv)); };

  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    Vec pg = projected_gradient(x, g, box);
    out.pg_norm = pg.lpNorm<Eigen::Infinity>();
    if (out.pg_norm <= tol_at(f)) {
      out.converged = true;
      break;
    }
    Vec dir = -(hinv * g);
    if (dir.dot(g) > -1e-14 * dir.norm() * g.norm()) {
      hinv = Mat::Identity(d, d) / std::max(1.0, g.lpNorm<Eigen::Infinity>());
      dir = -pg;
    }
    double alpha = 1.0;
    bool accepted = false;
    bool clipped = false;
    Vec xn;
    double fn = f;
    for (int ls = 0; ls < 60; ++ls) {
      Vec raw = x + alpha * dir;
      xn = clip(raw, box);
      Vec step = xn - x;
      if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
      fn = obj.eval(xn, gn);
      double slope = g.dot(step);
      if (std::isfinite(fn) && fn <= f + 1e-4 * std::min(slope, 0.0)) {
        accepted = true;
        clipped = xn != raw;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (dir != -pg) {  // retry once along the projected steepest descent
        hinv = Mat::Identity(d, d) / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        dir = -pg;
        alpha = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
          Vec raw = x + alpha * dir;
          xn = clip(raw, box);
          Vec step = xn - x;
          if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
          fn = obj.eval(xn, gn);
          if (std::isfinite(fn) && fn < f) {
            accepted = true;
            clipped = xn != raw;
            break;
          }
          alpha *= 0.5;
        }
      }
      if (!accepted) break;  // stalled
    }
    Vec s = xn - x;
    Vec yv = gn - g;
    if (clipped) {
      // a kinked step breaks the secant relation in the pinned coordinates
      // and would poison later directions; update with the free part only
      for (int k = 0; k < d; ++k) {
        if (xn[k] <= box.lo[k] || xn[k] >= box.hi[k]) {
          s[k] = 0.0;
          yv[k] = 0.0;
        }
      }
    }
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      Vec hy = hinv * yv;
      const double yhy = yv.dot(hy);
      hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose());
      Mat cross = hy * s.transpose();
      hinv -= (cross + cross.transpose()) / sy;
    }
    const double moved = (xn - x).lpNorm<Eigen::Infinity>();
    x = xn;
    f = fn;
    g = gn;
    if (moved <= 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      ++it;  // progress is below rounding; hand the endgame to the polish
      break;
    }
  }
  out.iterations = it;

  if (cfg.polish) {
    for (int round = 0; round < 12; ++round) {
      Vec pg = projected_gradient(x, g, box);
      out.pg_norm = pg.lpNorm<Eigen::Infinity>();
      if (out.pg_norm <= 1e-3 * tol_at(f)) break;
      std::vector<int> free;
      for (int k = 0; k < d; ++k) {
        const bool at_lo = x[k] <= box.lo[k] && g[k] > 0.0;
        const bool at_hi = x[k] >= box.hi[k] && g[k] < 0.0;
        if (!at_lo && !at_hi) free.push_back(k);
      }
      if (free.empty()) break;
      Mat hess = obj.hess(x);
      const int df = static_cast<int>(free.size());
      Mat a(df, df);
      Vec rhs(df);
      for (int r = 0; r < df; ++r) {
        rhs[r] = -g[free[r]];
        for (int c = 0; c < df; ++c) a(r, c) = hess(free[r], free[c]);
      }
      Eigen::LDLT<Mat> ldlt(a);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
      Vec delta = ldlt.solve(rhs);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls) {
        Vec xn = x;
        for (int r = 0; r < df; ++r) xn[free[r]] += alpha * delta[r];
        xn = clip(xn, box);
        if ((xn - x).lpNorm<Eigen::Infinity>() == 0.0) break;
        double fn = obj.eval(xn, gn);
        if (std::isfinite(fn) && fn <= f) {
          x = xn;
          f = fn;
          g = gn;
          accepted = true;
          ++out.iterations;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
    Vec pg = projected_gradient(x, g, box);
    out.pg_norm = pg.lpNorm<Eigen::Infinity>();
  }

  out.converged = out.pg_norm <= tol_at(f);
  out.x = std::move(x);
  out.grad = std::move(g);
  out.f = f;
  return out;
}

struct NegLoglik {
  const LagWorkspace<double>& ws;
  int p, q;
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    auto th = NdarParams<double>::unpack(p, q, x);
    Eigen::VectorXd grad;
    const double ll = loglik_score(ws, th, grad);
    g = -grad;
    return -ll;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const {
    return -hessian(ws, NdarParams<double>::unpack(p, q, x));
  }
};

}  // namespace detail

inline FitResult fit(const LagWorkspace<double>& ws, int p, int q,
                     const FitConfig& cfg = {}) {
  if (p < 0 || q < 0) throw ParameterError("lag orders must be nonnegative");
  if (std::max(p, q) > ws.m)
    throw ParameterError("panel presample shorter than the largest lag");
  if (cfg.multistart < 1) throw ParameterError("multistart must be positive");
  const int d = 2 * p + 2 * q + 1;
  const double nt_scale = static_cast<double>(ws.n) * ws.t_len;
  if (nt_scale <= d)
    throw ParameterError("sample too small for the parameter count");

  const detail::Box box = detail::make_box(p, q, cfg);
  detail::NegLoglik obj{ws, p, q};

  Eigen::VectorXd base;
  if (cfg.init == FitConfig::Init::given) {
    if (!cfg.start || cfg.start->size() != d)
      throw ParameterError("explicit start has wrong length");
    base = *cfg.start;
  } else {
    base = detail::least_squares_start(ws, p, q, cfg);
  }

  std::optional<detail::SolveOutcome> best;
  for (int s = 0; s < cfg.multistart; ++s) {
    Eigen::VectorXd start = base;
    if (s > 0) {  // deterministic spread around the base point
      const double shrink = 1.0 / (1.0 + s);
      start.head(p + q) *= shrink;
      start[p + q] *= 1.0 + 0.5 * s;
      start.tail(p + q).setConstant(0.01 * (1.0 + s));
    }
    detail::SolveOutcome run = detail::solve_box(obj, start, box, cfg);
    if (!best || run.f < best->f) best = std::move(run);
  }

  FitResult fitres;
  fitres.p = p;
  fitres.q = q;
  fitres.n = ws.n;
  fitres.t_len = ws.t_len;
  fitres.names = param_names(p, q);
  fitres.theta = best->x;
  fitres.loglik = -best->f;
  fitres.converged = best->converged;
  fitres.iterations = best->iterations;
  fitres.grad_norm = best->pg_norm;

  if (cfg.compute_inference) {
    SandwichParts parts = sandwich_covariance(ws, fitres.params());
    fitres.covariance = parts.cov;
    fitres.d_hat = parts.d_hat;
    fitres.std_errors = parts.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    wald_inference(fitres);
  }
  return fitres;
}

inline FitResult fit(const Network& net, const Panel<double>& panel, int p,
                     int q, const FitConfig& cfg = {}) {
  auto ws = LagWorkspace<double>::build(net, panel);
  return fit(ws, p, q, cfg);
}

}  // namespace ndar
