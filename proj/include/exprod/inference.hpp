#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exprod/effects.hpp"
#include "exprod/pipeline.hpp"

namespace exprod {

// Joint two-stage wild residual block bootstrap: one Rademacher weight per
// firm flips all of that firm's residuals in both estimating equations, the
// regressors and the point-estimate fitted structure stay fixed, and the full
// pipeline is rerun on the regenerated outcomes.
struct BootstrapSet {
  std::uint64_t seed = 0;
  int B = 0;  // requested replicates
  std::vector<std::string> names;
  std::vector<std::vector<double>> scalars;   // per successful replicate
  std::vector<std::vector<double>> lbe_rows;  // per replicate, per aligned row
  std::vector<std::vector<double>> lfe_rows;
  std::vector<int> replicate_ids;
  int failures = 0;
};

// One Rademacher weight per firm for replicate b; deterministic in (seed, b).
std::vector<double> wild_weights(std::uint64_t seed, int b, int n_firms);

// Applies the conditional regeneration: ln S^b = ln(alpha_M theta) - w_i eta,
// y^b = aK k + aL l + aM m + g_hat + w_i (zeta + eta). Regressors untouched.
EstimationSample regenerate_outcomes(const EstimationSample& sample, const PointFit& fit,
                                     std::span<const double> firm_weights);

BootstrapSet wild_bootstrap(const EstimationSample& sample, const PointFit& fit, int B,
                            std::uint64_t seed, const Stage2Options& opt = {}, int threads = 1);

void write_bootstrap_csv(const BootstrapSet& bs, const std::string& path);

// Delete-d jackknife over firm groups; scalar estimands recomputed on the
// reduced sample, row-level effects re-evaluated at the deletion parameters.
struct JackknifeSet {
  int delete_size = 0;
  int n_groups = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> scalars;  // per deletion group
  std::vector<std::vector<double>> lbe_rows;
  std::vector<std::vector<double>> lfe_rows;
};

JackknifeSet jackknife_pipeline(const EstimationSample& sample, const PointFit& fit,
                                int delete_size, const Stage2Options& opt = {}, int threads = 1);

// c_hat = sum_j (zbar - z_j)^3 / (6 [sum_j (zbar - z_j)^2]^{3/2}),
// zbar the mean of jackknife estimates; 0 with a flag when the variance is 0.
struct Acceleration {
  double c = 0;
  bool degenerate = false;
};

Acceleration jackknife_acceleration(std::span<const double> jackknife_estimates);

struct IntervalEstimate {
  double point = 0, lo = 0, hi = 0;
  double level = 0.95;
  double q0 = 0;  // bias-correction factor
  double c = 0;   // acceleration
  bool clamped = false;
};

// Accelerated bias-corrected percentile interval. Percentiles of the
// replicate set use linear interpolation between order statistics. The
// bias-correction count is clamped into [0.5, B-0.5] when all replicates fall
// on one side of the point (flagged).
IntervalEstimate bca_interval(double point, std::span<const double> replicates, double c,
                              double level = 0.95);

struct IntervalSet {
  std::vector<std::string> names;
  std::vector<IntervalEstimate> intervals;
};

// Intervals for every scalar estimand; acceleration comes from the jackknife
// set when provided, otherwise c = 0.
IntervalSet make_intervals(const EstimandSet& point, const BootstrapSet& bs,
                           const JackknifeSet* jk = nullptr, double level = 0.95);

// Row-level BCa intervals for lbe/lfe (used for significance flags).
struct RowIntervals {
  std::vector<double> lbe_lo, lbe_hi, lfe_lo, lfe_hi;
};

RowIntervals make_row_intervals(const EffectsTable& point_table, const BootstrapSet& bs,
                                const JackknifeSet* jk = nullptr, double level = 0.95);

struct SignificanceShares {
  double lbe[3] = {0, 0, 0};  // all, exporters, non-exporters
  double lfe[3] = {0, 0, 0};
};

SignificanceShares significance_share(const EffectsTable& table, const RowIntervals& iv);

}  // namespace exprod
