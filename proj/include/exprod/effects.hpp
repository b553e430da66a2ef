#pragma once

#include <span>
#include <string>
#include <vector>

#include "exprod/panel.hpp"
#include "exprod/stage2.hpp"

namespace exprod {

struct EffectPoint {
  double lbe = 0;          // d g / d X_{t-1}
  double lfe = 0;          // d g / d Xbar_{t-1}
  double persistence = 0;  // d g / d W_{t-1}
};

// Analytic gradient of the fitted degree-2 sieve at (W, X, Xbar); dummy
// columns shift the level only and contribute nothing here.
EffectPoint effects_at(const Stage2Result& s2, double w, double x, double xbar);

// Fitted sieve value, including the fixed-effect shift when labels are given.
double g_value(const Stage2Result& s2, double w, double x, double xbar,
               const std::string* region = nullptr, const std::string* industry = nullptr);

struct EffectsRow {
  double lbe = 0, lfe = 0, persistence = 0;
  double lfe_per_peer = 0;  // lfe / n_{t-1}; 0 and flagged when n = 0
  bool per_peer_flagged = false;
  bool exporter = false;  // 1(X_{t-1} > 0)
};

struct EffectsTable {
  std::vector<EffectsRow> rows;  // parallel to sample.aligned
};

EffectsTable compute_effects(const Stage2Result& s2, const EstimationSample& sample);

// LBE/LFE written as linear functions of (omega_{t-1}, X_{t-1}, Xbar_{t-1});
// W moves one-for-one with omega, so the omega slopes are the W-interaction
// coefficients. Intercepts are stated at W = X = Xbar = 0.
struct EffectFunction {
  double intercept = 0;
  double slope_omega = 0;
  double slope_x = 0;
  double slope_xbar = 0;
};

struct EffectFunctions {
  EffectFunction lbe, lfe;
};

EffectFunctions effect_functions(const Stage2Result& s2);

struct SummaryRow {
  double mean = 0, q1 = 0, median = 0, q3 = 0;
  double sig_share = -1;  // fraction of rows whose 95% interval excludes 0; <0 if unknown
  std::size_t n = 0;
};

// group index: 0 = all firms, 1 = exporters, 2 = non-exporters
struct EffectsSummary {
  SummaryRow lbe[3];
  SummaryRow lfe[3];
  SummaryRow lfe_per_peer[3];
};

// lo/hi spans, when non-empty, are per-row 95% bounds used for the
// significance shares. Throws on an empty subgroup.
EffectsSummary summarize_effects(const EffectsTable& table, std::span<const double> lbe_lo = {},
                                 std::span<const double> lbe_hi = {},
                                 std::span<const double> lfe_lo = {},
                                 std::span<const double> lfe_hi = {});

struct LongRunReport {
  double mean_persistence = 0;
  double lbe_long_run = 0;    // mean_lbe / (1 - rho_bar)
  double lfe_long_run = 0;    // mean_lfe / (1 - rho_bar)
  double total_per_10pp = 0;  // (lbe_lr + lfe_lr) * 10
  bool stationary = true;     // |rho_bar| < 1; multipliers are NaN otherwise
};

LongRunReport long_run(double mean_lbe, double mean_lfe, double mean_persistence);

}  // namespace exprod
