#include "exprod/pipeline.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "exprod/errors.hpp"
#include "exprod/stats.hpp"

namespace exprod {

PointFit run_pipeline(const EstimationSample& sample, const Stage2Options& opt) {
  PointFit fit;
  fit.s1 = estimate_stage1(sample);
  fit.ts = transform(sample, fit.s1);
  fit.s2 = fit_stage2(sample, fit.ts, fit.s1, opt);
  return fit;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void push(EstimandSet& e, const std::string& name, double v) {
  e.names.push_back(name);
  e.values.push_back(v);
}

void push_group_stats(EstimandSet& e, const char* prefix, const SummaryRow* rows) {
  static const char* groups[3] = {"all", "exp", "non"};
  for (int g = 0; g < 3; ++g) {
    const std::string base = std::string(prefix) + "_" + groups[g];
    push(e, base + "_mean", rows[g].mean);
    push(e, base + "_q1", rows[g].q1);
    push(e, base + "_med", rows[g].median);
    push(e, base + "_q3", rows[g].q3);
  }
}

}  // namespace

EstimandSet compute_estimands(const EstimationSample& sample, const PointFit& fit) {
  EstimandSet e;
  push(e, "alpha_m", fit.s1.alpha_m);
  push(e, "theta", fit.s1.theta);
  push(e, "ln_alpham_theta", fit.s1.ln_alpham_theta);
  push(e, "alpha_k", fit.s2.alpha_k);
  push(e, "alpha_l", fit.s2.alpha_l);
  push(e, "scale_elasticity", fit.s1.alpha_m + fit.s2.alpha_k + fit.s2.alpha_l);
  for (Eigen::Index j = 0; j < fit.s2.gamma.size(); ++j)
    push(e, "gamma_" + fit.s2.basis_names[j], fit.s2.gamma[j]);

  const EffectsTable table = compute_effects(fit.s2, sample);
  const EffectsSummary summary = summarize_effects(table);
  push_group_stats(e, "lbe", summary.lbe);
  push_group_stats(e, "lfe", summary.lfe);
  push(e, "lfe_pp_all_mean", summary.lfe_per_peer[0].mean);
  push(e, "lfe_pp_exp_mean", summary.lfe_per_peer[1].mean);
  push(e, "lfe_pp_non_mean", summary.lfe_per_peer[2].mean);

  const EffectFunctions fns = effect_functions(fit.s2);
  push(e, "fn_lbe_omega", fns.lbe.slope_omega);
  push(e, "fn_lbe_x", fns.lbe.slope_x);
  push(e, "fn_lbe_xbar", fns.lbe.slope_xbar);
  push(e, "fn_lfe_omega", fns.lfe.slope_omega);
  push(e, "fn_lfe_x", fns.lfe.slope_x);
  push(e, "fn_lfe_xbar", fns.lfe.slope_xbar);

  std::vector<double> persistence(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) persistence[i] = table.rows[i].persistence;
  const double rho_bar = mean(persistence);
  const LongRunReport lr = long_run(summary.lbe[0].mean, summary.lfe[0].mean, rho_bar);
  push(e, "persistence_mean", rho_bar);
  push(e, "lr_lbe", lr.lbe_long_run);
  push(e, "lr_lfe", lr.lfe_long_run);
  push(e, "lr_total_per10pp", lr.total_per_10pp);

  // exporter premium on recovered productivity, grouped by current-period status
  std::vector<double> w_exp, w_non;
  for (std::size_t i = 0; i < sample.aligned.size(); ++i) {
    if (sample.aligned[i].x_cur_raw > 0.0)
      w_exp.push_back(fit.s2.omega_plus_const[i]);
    else
      w_non.push_back(fit.s2.omega_plus_const[i]);
  }
  const bool have_groups = !w_exp.empty() && !w_non.empty();
  push(e, "premium_mean_diff", have_groups ? mean(w_exp) - mean(w_non) : kNan);
  for (double tau : premium_taus()) {
    char name[40];
    std::snprintf(name, sizeof(name), "premium_tau_%03d", static_cast<int>(std::lround(tau * 100)));
    push(e, name,
         have_groups ? quantile_lower(w_exp, tau) - quantile_lower(w_non, tau) : kNan);
  }
  return e;
}

EstimationSample filter_sample(const EstimationSample& sample,
                               const std::function<bool(int)>& keep_firm) {
  EstimationSample out;
  out.measure = sample.measure;

  std::vector<std::size_t> obs_map(sample.all_rows.size(), static_cast<std::size_t>(-1));
  std::unordered_map<int, int> firm_map;
  for (std::size_t i = 0; i < sample.all_rows.size(); ++i) {
    const auto& o = sample.all_rows[i];
    if (!keep_firm(o.firm_index)) continue;
    obs_map[i] = out.all_rows.size();
    ObsRow copy = o;
    auto [it, inserted] = firm_map.emplace(o.firm_index, static_cast<int>(firm_map.size()));
    copy.firm_index = it->second;
    out.all_rows.push_back(std::move(copy));
  }
  out.n_firms = static_cast<int>(firm_map.size());

  std::vector<char> firm_aligned(firm_map.size(), 0);
  for (const auto& a : sample.aligned) {
    if (!keep_firm(a.firm_index)) continue;
    AlignedRow copy = a;
    copy.obs_index = obs_map[a.obs_index];
    copy.firm_index = firm_map.at(a.firm_index);
    firm_aligned[copy.firm_index] = 1;
    out.aligned.push_back(std::move(copy));
  }
  for (char f : firm_aligned) out.n_firms_aligned += f;
  out.dropped_rows = out.all_rows.size() - out.aligned.size();
  if (out.all_rows.size() < 2 || out.aligned.empty())
    throw ValidationError("filter_sample: too few rows remain");
  return out;
}

}  // namespace exprod
