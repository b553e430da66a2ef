#include "exprod/stage1.hpp"

#include <cmath>

#include "exprod/errors.hpp"

namespace exprod {

Stage1Result estimate_stage1(const EstimationSample& sample) {
  const auto& rows = sample.all_rows;
  if (rows.size() < 2) throw ValidationError("stage1: need at least 2 observations");

  Stage1Result r;
  r.n_obs = rows.size();

  double sum = 0.0;
  for (const auto& o : rows) sum += o.ln_share;
  r.ln_alpham_theta = sum / static_cast<double>(rows.size());

  r.eta.resize(rows.size());
  double theta_sum = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r.eta[i] = r.ln_alpham_theta - rows[i].ln_share;
    theta_sum += std::exp(r.eta[i]);
  }
  r.theta = theta_sum / static_cast<double>(rows.size());
  r.alpha_m = std::exp(r.ln_alpham_theta) / r.theta;
  return r;
}

TransformedSample transform(const EstimationSample& sample, const Stage1Result& s1) {
  TransformedSample t;
  const auto n = sample.aligned.size();
  t.y_star.resize(n);
  t.m_star_lag.resize(n);
  t.eta_cur.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = sample.aligned[i];
    t.y_star[i] = a.y - s1.alpha_m * a.m;
    t.m_star_lag[i] =
        std::log(a.rel_price_lag) - s1.ln_alpham_theta - (s1.alpha_m - 1.0) * a.m_lag;
    t.eta_cur[i] = s1.eta[a.obs_index];
  }
  return t;
}

}  // namespace exprod
