#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ndar/estimate.hpp"

namespace ndar {

// Penalty multiplier for the model dimension: log of the time length alone,
// or of the full observation count n * t_len.
enum class PenaltyScale { log_t, log_nt };

inline double bic_value(double loglik, int dim, int n, int t_len,
                        PenaltyScale scale = PenaltyScale::log_t) {
  const double lp = scale == PenaltyScale::log_t
                        ? std::log(static_cast<double>(t_len))
                        : std::log(static_cast<double>(n) * t_len);
  return -2.0 * loglik + dim * lp;
}

struct SelectConfig {
  int r_max = 3;
  PenaltyScale penalty = PenaltyScale::log_t;
  FitConfig fit;  // base optimizer settings; per-cell runs skip inference
};

struct SelectionCell {
  int p = 0, q = 0;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double bic = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;      // fit completed with a finite objective
  bool converged = false;  // gradient criterion met
  Eigen::VectorXd theta;
  std::string note;  // failure reason when invalid
};

struct SelectionResult {
  int p = 0, q = 0;  // orders with the smallest criterion
  int r_max = 0;
  PenaltyScale penalty = PenaltyScale::log_t;
  int n = 0, t_len = 0;  // shared estimation sample across all cells
  std::vector<SelectionCell> cells;
  FitResult best;  // refit at the chosen orders, with inference

  const SelectionCell& cell(int cp, int cq) const {
    return cells[static_cast<std::size_t>(cp) * (r_max + 1) + cq];
  }
  SelectionCell& cell(int cp, int cq) {
    return cells[static_cast<std::size_t>(cp) * (r_max + 1) + cq];
  }
};

// Under- and over-shooting of a known true order: any deficient lag counts
// as lower, even when the other order overshoots.
enum class OrderClass { lower, exact, higher };

inline OrderClass classify_order(int p_hat, int q_hat, int p_true, int q_true) {
  if (p_hat < p_true || q_hat < q_true) return OrderClass::lower;
  if (p_hat == p_true && q_hat == q_true) return OrderClass::exact;
  return OrderClass::higher;
}

inline const char* order_class_name(OrderClass c) {
  switch (c) {
    case OrderClass::lower: return "lower";
    case OrderClass::exact: return "exact";
    default: return "higher";
  }
}

// Fits every (p, q) on the grid [0, r_max]^2 over one shared sample, then
// keeps the cell with the smallest criterion.  The sample is fixed by
// reserving r_max presample rows for every cell, so criteria are comparable.
// Cells are visited by total lag order and warm-started from the better of
// their two predecessors, embedded with zeros in the new lag slots; the fit
// can then only improve on the predecessor's likelihood.
inline SelectionResult select_order(const Network& net,
                                    const Panel<double>& panel,
                                    const SelectConfig& cfg = {}) {
  if (cfg.r_max < 0) throw ParameterError("r_max must be nonnegative");
  const int depth = std::max(panel.m(), cfg.r_max);
  const Panel<double> common = panel.with_presample_depth(depth);
  const auto ws = LagWorkspace<double>::build(net, common);
  const int r = cfg.r_max;

  SelectionResult res;
  res.r_max = r;
  res.penalty = cfg.penalty;
  res.n = ws.n;
  res.t_len = ws.t_len;
  res.cells.resize(static_cast<std::size_t>(r + 1) * (r + 1));
  for (int p = 0; p <= r; ++p)
    for (int q = 0; q <= r; ++q) {
      res.cell(p, q).p = p;
      res.cell(p, q).q = q;
    }

  FitConfig cell_cfg = cfg.fit;
  cell_cfg.compute_inference = false;

  for (int s = 0; s <= 2 * r; ++s) {
    for (int p = std::max(0, s - r); p <= std::min(r, s); ++p) {
      const int q = s - p;
      SelectionCell& cell = res.cell(p, q);
      FitConfig run_cfg = cell_cfg;
      const SelectionCell* warm = nullptr;
      if (p > 0 && res.cell(p - 1, q).valid) warm = &res.cell(p - 1, q);
      if (q > 0 && res.cell(p, q - 1).valid) {
        const SelectionCell& c2 = res.cell(p, q - 1);
        if (!warm || c2.loglik > warm->loglik) warm = &c2;
      }
      if (warm) {
        run_cfg.init = FitConfig::Init::given;
        run_cfg.start = NdarParams<double>::unpack(warm->p, warm->q, warm->theta)
                            .embedded(p, q)
                            .pack();
      }
      try {
        FitResult fr = fit(ws, p, q, run_cfg);
        if (!std::isfinite(fr.loglik)) throw NumericError("non-finite likelihood");
        cell.loglik = fr.loglik;
        cell.bic = bic_value(fr.loglik, fr.theta.size(), ws.n, ws.t_len,
                             cfg.penalty);
        cell.theta = fr.theta;
        cell.converged = fr.converged;
        cell.valid = true;
      } catch (const std::exception& ex) {
        cell.note = ex.what();
      }
    }
  }

  // Lexicographically first cell wins ties closer than 1e-9.
  const SelectionCell* pick = nullptr;
  for (int p = 0; p <= r; ++p)
    for (int q = 0; q <= r; ++q) {
      const SelectionCell& cell = res.cell(p, q);
      if (!cell.valid) continue;
      if (!pick || cell.bic < pick->bic - 1e-9) pick = &cell;
    }
  if (!pick) throw SelectionError("no lag order could be fitted on the grid");

  res.p = pick->p;
  res.q = pick->q;
  FitConfig best_cfg = cfg.fit;
  best_cfg.init = FitConfig::Init::given;
  best_cfg.start = pick->theta;
  best_cfg.compute_inference = cfg.fit.compute_inference;
  res.best = fit(ws, res.p, res.q, best_cfg);
  return res;
}

}  // namespace ndar
