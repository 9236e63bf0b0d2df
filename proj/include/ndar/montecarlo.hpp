#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "ndar/estimate.hpp"
#include "ndar/select.hpp"
#include "ndar/simulate.hpp"

namespace ndar {

struct NetworkConfig {
  enum class Kind { uniform, power_law, block };
  Kind kind = Kind::uniform;
  int n = 50;
  int max_out_degree = 5;  // uniform and power-law kinds
  double gamma = 2.5;      // power-law attractiveness exponent
  int n_blocks = -1;       // block kind; nonpositive means n / 10
  double p_within = -1.0;  // negative means the scaled defaults
  double p_between = -1.0;

  Network generate(std::uint64_t seed) const {
    switch (kind) {
      case Kind::uniform:
        return gen_uniform_random(n, max_out_degree, seed);
      case Kind::power_law:
        return gen_power_law(n, max_out_degree, gamma, seed);
      default: {
        int blocks = n_blocks > 0 ? n_blocks : std::max(1, n / 10);
        return gen_stochastic_block(n, blocks, p_within, p_between, seed);
      }
    }
  }
};

inline const char* network_kind_name(NetworkConfig::Kind k) {
  switch (k) {
    case NetworkConfig::Kind::uniform: return "uniform";
    case NetworkConfig::Kind::power_law: return "powerlaw";
    default: return "sbm";
  }
}

inline NetworkConfig::Kind parse_network_kind(const std::string& s) {
  if (s == "uniform") return NetworkConfig::Kind::uniform;
  if (s == "powerlaw" || s == "power_law") return NetworkConfig::Kind::power_law;
  if (s == "sbm" || s == "block") return NetworkConfig::Kind::block;
  throw ParameterError("unknown network kind: " + s);
}

struct McDesign {
  NetworkConfig network;
  NdarParams<double> truth;
  InnovationLaw law = InnovationLaw::normal;
  int t_len = 100;
  int replications = 100;
  int burn_in = 500;
  std::uint64_t network_seed = 1;
  std::uint64_t base_seed = 1000;  // replication r draws from base_seed + r
  int threads = 1;
  FitConfig fit;
};

namespace detail {

// Runs fn(0..count-1), possibly on several threads, storing each result at
// its own index so the reduction order never depends on scheduling.
template <class Result, class Fn>
std::vector<Result> run_indexed(int count, int threads, const Fn& fn) {
  std::vector<Result> out(static_cast<std::size_t>(count));
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      out[static_cast<std::size_t>(i)] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace detail

// Replication summaries for a fixed-order estimation study: averages of the
// estimation error, of the reported standard deviations, the spread of the
// estimates themselves, and the nominal 95% coverage.
struct McReport {
  // design echo
  std::string network_kind;
  int n = 0, t_len = 0, replications = 0, burn_in = 0;
  std::string law;
  std::uint64_t network_seed = 0, base_seed = 0;
  int p = 0, q = 0;
  Eigen::VectorXd theta0;

  std::vector<std::string> names;
  int r_ok = 0, failures = 0;
  Eigen::VectorXd bias, asd, esd, coverage;
  double elapsed_seconds = 0;  // wall clock; not part of the reproducible state
};

inline McReport run_qmle_study(const McDesign& design) {
  const auto t0 = std::chrono::steady_clock::now();
  design.truth.validate();
  const Network net = design.network.generate(design.network_seed);
  const int p = design.truth.p(), q = design.truth.q();
  const int d = design.truth.dim();
  const int depth = std::max(1, design.truth.max_lag());
  const double zstar = normal_quantile(0.975);
  const Eigen::VectorXd theta0 = design.truth.pack();

  struct Rep {
    bool ok = false;
    Eigen::VectorXd theta, se;
  };
  FitConfig fit_cfg = design.fit;
  auto one = [&](int r) -> Rep {
    Rep rep;
    try {
      Panel<double> panel =
          simulate(net, design.truth, design.law, design.t_len, design.burn_in,
                   design.base_seed + static_cast<std::uint64_t>(r), depth);
      FitResult fr = fit(net, panel, p, q, fit_cfg);
      if (!fr.converged || !fr.theta.allFinite() || !fr.std_errors.allFinite())
        return rep;
      rep.theta = fr.theta;
      rep.se = fr.std_errors;
      rep.ok = true;
    } catch (const NumericError&) {
    }
    return rep;
  };
  const auto reps = detail::run_indexed<Rep>(design.replications,
                                             design.threads, one);

  McReport rpt;
  rpt.network_kind = network_kind_name(design.network.kind);
  rpt.n = net.n;
  rpt.t_len = design.t_len;
  rpt.replications = design.replications;
  rpt.burn_in = design.burn_in;
  rpt.law = innovation_law_name(design.law);
  rpt.network_seed = design.network_seed;
  rpt.base_seed = design.base_seed;
  rpt.p = p;
  rpt.q = q;
  rpt.theta0 = theta0;
  rpt.names = param_names(p, q);

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sumsq = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sse = Eigen::VectorXd::Zero(d), cover = Eigen::VectorXd::Zero(d);
  for (const Rep& rep : reps) {
    if (!rep.ok) {
      ++rpt.failures;
      continue;
    }
    ++rpt.r_ok;
    sum += rep.theta;
    sumsq += rep.theta.cwiseProduct(rep.theta);
    sse += rep.se;
    for (int k = 0; k < d; ++k)
      if (std::abs(rep.theta[k] - theta0[k]) <= zstar * rep.se[k])
        cover[k] += 1.0;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (rpt.r_ok > 0) {
    const double inv = 1.0 / rpt.r_ok;
    Eigen::VectorXd mean = sum * inv;
    rpt.bias = mean - theta0;
    rpt.asd = sse * inv;
    rpt.coverage = cover * inv;
    if (rpt.r_ok > 1) {
      Eigen::VectorXd var = sumsq * inv - mean.cwiseProduct(mean);
      rpt.esd = var.cwiseMax(0.0).cwiseSqrt();
    } else {
      rpt.esd = Eigen::VectorXd::Constant(d, nan);
    }
  } else {
    rpt.bias = Eigen::VectorXd::Constant(d, nan);
    rpt.asd = Eigen::VectorXd::Constant(d, nan);
    rpt.esd = Eigen::VectorXd::Constant(d, nan);
    rpt.coverage = Eigen::VectorXd::Constant(d, nan);
  }
  rpt.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rpt;
}

// Replication summary for order selection over the (p, q) grid.
struct BicReport {
  std::string network_kind;
  int n = 0, t_len = 0, replications = 0, burn_in = 0, r_max = 0;
  std::string law;
  std::string penalty;
  std::uint64_t network_seed = 0, base_seed = 0;
  int p_true = 0, q_true = 0;

  int r_ok = 0, failures = 0;
  int lower = 0, exact = 0, higher = 0;
  double rate_lower = 0, rate_exact = 0, rate_higher = 0;
  std::vector<std::pair<int, int>> chosen;  // per replication, (-1,-1) on failure
  double elapsed_seconds = 0;
};

struct BicDesign {
  McDesign base;
  int r_max = 3;
  PenaltyScale penalty = PenaltyScale::log_t;
};

inline BicReport run_bic_study(const BicDesign& design) {
  const auto t0 = std::chrono::steady_clock::now();
  const McDesign& mc = design.base;
  mc.truth.validate();
  const Network net = mc.network.generate(mc.network_seed);
  SelectConfig sel;
  sel.r_max = design.r_max;
  sel.penalty = design.penalty;
  sel.fit = mc.fit;
  sel.fit.compute_inference = false;
  const int depth = std::max({1, design.r_max, mc.truth.max_lag()});

  struct Rep {
    bool ok = false;
    int p = -1, q = -1;
  };
  auto one = [&](int r) -> Rep {
    Rep rep;
    try {
      Panel<double> panel =
          simulate(net, mc.truth, mc.law, mc.t_len, mc.burn_in,
                   mc.base_seed + static_cast<std::uint64_t>(r), depth);
      SelectionResult sr = select_order(net, panel, sel);
      rep.p = sr.p;
      rep.q = sr.q;
      rep.ok = true;
    } catch (const NumericError&) {
    }
    return rep;
  };
  const auto reps =
      detail::run_indexed<Rep>(mc.replications, mc.threads, one);

  BicReport rpt;
  rpt.network_kind = network_kind_name(mc.network.kind);
  rpt.n = net.n;
  rpt.t_len = mc.t_len;
  rpt.replications = mc.replications;
  rpt.burn_in = mc.burn_in;
  rpt.r_max = design.r_max;
  rpt.law = innovation_law_name(mc.law);
  rpt.penalty = design.penalty == PenaltyScale::log_t ? "log_t" : "log_nt";
  rpt.network_seed = mc.network_seed;
  rpt.base_seed = mc.base_seed;
  rpt.p_true = mc.truth.p();
  rpt.q_true = mc.truth.q();
  rpt.chosen.reserve(reps.size());
  for (const Rep& rep : reps) {
    rpt.chosen.emplace_back(rep.p, rep.q);
    if (!rep.ok) {
      ++rpt.failures;
      continue;
    }
    ++rpt.r_ok;
    switch (classify_order(rep.p, rep.q, rpt.p_true, rpt.q_true)) {
      case OrderClass::lower: ++rpt.lower; break;
      case OrderClass::exact: ++rpt.exact; break;
      default: ++rpt.higher; break;
    }
  }
  if (rpt.r_ok > 0) {
    rpt.rate_lower = static_cast<double>(rpt.lower) / rpt.r_ok;
    rpt.rate_exact = static_cast<double>(rpt.exact) / rpt.r_ok;
    rpt.rate_higher = static_cast<double>(rpt.higher) / rpt.r_ok;
  }
  rpt.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rpt;
}

}  // namespace ndar
