#pragma once

#include <vector>

#include "exprod/panel.hpp"

namespace exprod {

// First-stage share-equation estimates. eta is per-observation over
// EstimationSample::all_rows; its sample mean is zero by construction.
struct Stage1Result {
  double ln_alpham_theta = 0;  // mean of ln S^M
  double theta = 1;            // mean of exp(eta_hat), >= 1 by Jensen
  double alpha_m = 0;          // exp(ln_alpham_theta) / theta
  std::vector<double> eta;     // parallel to sample.all_rows
  std::size_t n_obs = 0;
};

// Moments use every usable firm-year row, not only the lag-aligned ones.
Stage1Result estimate_stage1(const EstimationSample& sample);

// Stage-1 transform of the aligned rows: y* = y - alpha_m*m and the
// lagged proxy component m*_{t-1} = ln(rel_price_{t-1}) - ln(alpha_m*theta)
// - (alpha_m - 1)*m_{t-1}. eta_cur is the current row's stage-1 shock.
struct TransformedSample {
  std::vector<double> y_star;      // parallel to sample.aligned
  std::vector<double> m_star_lag;  // parallel to sample.aligned
  std::vector<double> eta_cur;     // stage-1 eta at the current row
};

TransformedSample transform(const EstimationSample& sample, const Stage1Result& s1);

}  // namespace exprod
