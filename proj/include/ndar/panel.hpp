#pragma once

#include <Eigen/Dense>

#include "ndar/errors.hpp"

namespace ndar {

// Observed data block.  Rows are time points (oldest first), columns nodes.
// pre holds the m rows immediately before the estimation sample; lagged
// regressors for early observations are served from it, so the likelihood
// always runs over all t_len rows of obs.
template <class Scalar = double>
struct Panel {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Mat pre;  // m x n
  Mat obs;  // t_len x n

  int m() const { return static_cast<int>(pre.rows()); }
  int t_len() const { return static_cast<int>(obs.rows()); }
  int n() const { return static_cast<int>(obs.cols()); }

  void validate() const {
    if (obs.rows() < 1) throw ParameterError("panel needs at least one row");
    if (obs.cols() < 1) throw ParameterError("panel needs at least one node");
    if (pre.rows() > 0 && pre.cols() != obs.cols())
      throw ParameterError("presample and observation column counts differ");
    if (!obs.allFinite() || (pre.rows() > 0 && !pre.allFinite()))
      throw ParameterError("panel contains non-finite values");
  }

  Mat stacked() const {
    Mat s(pre.rows() + obs.rows(), obs.cols());
    if (pre.rows() > 0) s.topRows(pre.rows()) = pre;
    s.bottomRows(obs.rows()) = obs;
    return s;
  }

  // Observation rows [first, first+len) with `depth` preceding rows as the
  // new presample, all cut from the stacked history.
  Panel window(int first, int len, int depth) const {
    if (first < 0 || len < 1 || first + len > t_len())
      throw ParameterError("window range outside the panel");
    if (depth < 0 || depth > m() + first)
      throw ParameterError("window presample depth exceeds available history");
    Mat s = stacked();
    Panel out;
    out.pre = s.middleRows(m() + first - depth, depth);
    out.obs = s.middleRows(m() + first, len);
    return out;
  }

  // Same data re-split so the presample holds exactly `depth` rows.  When
  // depth exceeds m, leading observation rows are reclassified and t_len
  // shrinks accordingly.
  Panel with_presample_depth(int depth) const {
    if (depth <= m()) return window(0, t_len(), depth);
    int shift = depth - m();
    if (shift >= t_len())
      throw ParameterError("presample depth would consume every observation");
    return window(shift, t_len() - shift, depth);
  }
};

}  // namespace ndar
