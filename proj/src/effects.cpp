#include "exprod/effects.hpp"

#include <cmath>
#include <limits>

#include "exprod/errors.hpp"
#include "exprod/stats.hpp"

namespace exprod {

EffectPoint effects_at(const Stage2Result& s2, double w, double x, double xbar) {
  const auto& g = s2.gamma;
  if (g.size() < kSieveDim)
    throw ValidationError("effects_at: fit does not carry the full degree-2 sieve");
  EffectPoint e;
  e.lbe = g[3] + 2.0 * g[4] * x + g[7] * w + g[9] * xbar;
  e.lfe = g[5] + 2.0 * g[6] * xbar + g[8] * w + g[9] * x;
  e.persistence = g[1] + 2.0 * g[2] * w + g[7] * x + g[8] * xbar;
  return e;
}

double g_value(const Stage2Result& s2, double w, double x, double xbar, const std::string* region,
               const std::string* industry) {
  const auto& g = s2.gamma;
  if (g.size() < kSieveDim) return g[0] + g[1] * w + g[2] * w * w;  // markov-only fit
  double v = g[0] + g[1] * w + g[2] * w * w + g[3] * x + g[4] * x * x + g[5] * xbar +
             g[6] * xbar * xbar + g[7] * w * x + g[8] * w * xbar + g[9] * x * xbar;
  int col = kSieveDim;
  if (s2.fe_region) {
    for (std::size_t lv = 1; lv < s2.region_levels.size(); ++lv, ++col)
      if (region && *region == s2.region_levels[lv]) v += g[col];
  }
  if (s2.fe_industry) {
    for (std::size_t lv = 1; lv < s2.industry_levels.size(); ++lv, ++col)
      if (industry && *industry == s2.industry_levels[lv]) v += g[col];
  }
  return v;
}

EffectsTable compute_effects(const Stage2Result& s2, const EstimationSample& sample) {
  EffectsTable t;
  t.rows.resize(sample.aligned.size());
  for (std::size_t i = 0; i < sample.aligned.size(); ++i) {
    const auto& a = sample.aligned[i];
    const EffectPoint e = effects_at(s2, s2.w_hat[i], a.x_lag, a.xbar_lag);
    EffectsRow& r = t.rows[i];
    r.lbe = e.lbe;
    r.lfe = e.lfe;
    r.persistence = e.persistence;
    r.per_peer_flagged = a.n_lag == 0;
    r.lfe_per_peer = a.n_lag > 0 ? e.lfe / static_cast<double>(a.n_lag) : 0.0;
    r.exporter = a.exporter_lag;
  }
  return t;
}

EffectFunctions effect_functions(const Stage2Result& s2) {
  const auto& g = s2.gamma;
  EffectFunctions f;
  f.lbe.intercept = g[3];
  f.lbe.slope_omega = g[7];
  f.lbe.slope_x = 2.0 * g[4];
  f.lbe.slope_xbar = g[9];
  f.lfe.intercept = g[5];
  f.lfe.slope_omega = g[8];
  f.lfe.slope_x = g[9];
  f.lfe.slope_xbar = 2.0 * g[6];
  return f;
}

namespace {

SummaryRow summarize_group(const EffectsTable& table, std::span<const double> lo,
                           std::span<const double> hi, int group, int which) {
  std::vector<double> vals;
  std::size_t sig = 0, with_iv = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (group == 1 && !r.exporter) continue;
    if (group == 2 && r.exporter) continue;
    const double v = which == 0 ? r.lbe : which == 1 ? r.lfe : r.lfe_per_peer;
    vals.push_back(v);
    if (!lo.empty()) {
      ++with_iv;
      if (lo[i] > 0.0 || hi[i] < 0.0) ++sig;
    }
  }
  if (vals.empty()) throw ValidationError("summarize_effects: empty subgroup");
  SummaryRow s;
  s.n = vals.size();
  s.mean = mean(vals);
  s.q1 = percentile_linear(vals, 0.25);
  s.median = percentile_linear(vals, 0.5);
  s.q3 = percentile_linear(vals, 0.75);
  s.sig_share = with_iv > 0 ? static_cast<double>(sig) / static_cast<double>(with_iv) : -1.0;
  return s;
}

}  // namespace

EffectsSummary summarize_effects(const EffectsTable& table, std::span<const double> lbe_lo,
                                 std::span<const double> lbe_hi, std::span<const double> lfe_lo,
                                 std::span<const double> lfe_hi) {
  EffectsSummary s;
  for (int group = 0; group < 3; ++group) {
    s.lbe[group] = summarize_group(table, lbe_lo, lbe_hi, group, 0);
    s.lfe[group] = summarize_group(table, lfe_lo, lfe_hi, group, 1);
    s.lfe_per_peer[group] = summarize_group(table, {}, {}, group, 2);
  }
  return s;
}

LongRunReport long_run(double mean_lbe, double mean_lfe, double mean_persistence) {
  LongRunReport r;
  r.mean_persistence = mean_persistence;
  if (!(std::fabs(mean_persistence) < 1.0)) {
    r.stationary = false;
    r.lbe_long_run = r.lfe_long_run = r.total_per_10pp = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.lbe_long_run = mean_lbe / (1.0 - mean_persistence);
  r.lfe_long_run = mean_lfe / (1.0 - mean_persistence);
  r.total_per_10pp = (r.lbe_long_run + r.lfe_long_run) * 10.0;
  return r;
}

}  // namespace exprod
