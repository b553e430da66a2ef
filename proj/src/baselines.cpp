#include "exprod/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "exprod/errors.hpp"
#include "exprod/parallel.hpp"
#include "exprod/pipeline.hpp"
#include "exprod/rng.hpp"
#include "exprod/stats.hpp"

namespace exprod {

PremiumReport premium(std::span<const double> omega, std::span<const char> exporter,
                      std::span<const double> taus) {
  if (omega.size() != exporter.size()) throw ValidationError("premium: size mismatch");
  std::vector<double> w_exp, w_non;
  for (std::size_t i = 0; i < omega.size(); ++i)
    (exporter[i] ? w_exp : w_non).push_back(omega[i]);
  if (w_exp.empty() || w_non.empty())
    throw ValidationError("premium: one exporter-status subgroup is empty");

  PremiumReport r;
  r.n_exporters = w_exp.size();
  r.n_non = w_non.size();
  r.mean_diff = mean(w_exp) - mean(w_non);
  r.taus.assign(taus.begin(), taus.end());
  for (double tau : taus) {
    const double q_non = quantile_lower(w_non, tau);
    const double q_exp = quantile_lower(w_exp, tau);
    r.beta0.push_back(q_non);
    r.beta1.push_back(q_exp - q_non);
  }
  return r;
}

namespace {

// sup_x (F_exp(x) - F_non(x)) scaled by sqrt(n*m/(n+m)); both inputs sorted
double ks_one_sided(const std::vector<double>& exp_sorted, const std::vector<double>& non_sorted) {
  const double n = static_cast<double>(exp_sorted.size());
  const double m = static_cast<double>(non_sorted.size());
  std::size_t ie = 0, in = 0;
  double dmax = 0.0;
  while (ie < exp_sorted.size() || in < non_sorted.size()) {
    double x;
    if (in >= non_sorted.size())
      x = exp_sorted[ie];
    else if (ie >= exp_sorted.size())
      x = non_sorted[in];
    else
      x = std::min(exp_sorted[ie], non_sorted[in]);
    while (ie < exp_sorted.size() && exp_sorted[ie] <= x) ++ie;
    while (in < non_sorted.size() && non_sorted[in] <= x) ++in;
    dmax = std::max(dmax, static_cast<double>(ie) / n - static_cast<double>(in) / m);
  }
  return std::sqrt(n * m / (n + m)) * dmax;
}

}  // namespace

DominanceResult dominance_test(std::span<const double> omega, std::span<const char> exporter,
                               std::span<const int> firm_of_row, const DominanceConfig& cfg) {
  if (omega.size() != exporter.size() || omega.size() != firm_of_row.size())
    throw ValidationError("dominance_test: size mismatch");

  int n_firms = 0;
  for (int f : firm_of_row) n_firms = std::max(n_firms, f + 1);
  std::vector<std::vector<int>> rows_by_firm(n_firms);
  for (std::size_t i = 0; i < firm_of_row.size(); ++i)
    rows_by_firm[firm_of_row[i]].push_back(static_cast<int>(i));

  std::vector<double> full_exp, full_non;
  for (std::size_t i = 0; i < omega.size(); ++i)
    (exporter[i] ? full_exp : full_non).push_back(omega[i]);
  if (full_exp.empty() || full_non.empty())
    throw ValidationError("dominance_test: one subgroup is empty");
  std::sort(full_exp.begin(), full_exp.end());
  std::sort(full_non.begin(), full_non.end());

  DominanceResult res;
  res.statistic = ks_one_sided(full_exp, full_non);
  res.b_used = cfg.b > 0 ? cfg.b : static_cast<int>(std::floor(std::pow(n_firms, 0.7)));
  if (res.b_used < 1 || res.b_used > n_firms)
    throw ValidationError("dominance_test: subsample size " + std::to_string(res.b_used) +
                          " incompatible with " + std::to_string(n_firms) + " firms");

  std::vector<double> stats(cfg.R, std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<std::size_t>(cfg.R), cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r + 1);
    // partial Fisher-Yates: first b entries are the drawn firms
    std::vector<int> firms(n_firms);
    std::iota(firms.begin(), firms.end(), 0);
    for (int i = 0; i < res.b_used; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_firms - i)));
      std::swap(firms[i], firms[j]);
    }
    std::vector<double> sub_exp, sub_non;
    for (int i = 0; i < res.b_used; ++i)
      for (int row : rows_by_firm[firms[i]])
        (exporter[row] ? sub_exp : sub_non).push_back(omega[row]);
    if (sub_exp.empty() || sub_non.empty()) return;  // left NaN, counted as skipped
    std::sort(sub_exp.begin(), sub_exp.end());
    std::sort(sub_non.begin(), sub_non.end());
    stats[r] = ks_one_sided(sub_exp, sub_non);
  });

  int at_least = 0;
  for (double s : stats) {
    if (std::isnan(s)) {
      ++res.skipped;
      continue;
    }
    ++res.R_used;
    if (s >= res.statistic) ++at_least;
  }
  if (res.R_used == 0) throw ValidationError("dominance_test: all subsamples degenerate");
  res.p_value = static_cast<double>(at_least) / static_cast<double>(res.R_used);
  return res;
}

OlsClusterResult ols_cluster(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             std::span<const int> cluster) {
  if (X.rows() != y.size() || static_cast<std::size_t>(X.rows()) != cluster.size())
    throw ValidationError("ols_cluster: size mismatch");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(1e-10);
  qr.compute(X);
  const auto rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> retained(perm.data(), perm.data() + rank);
  std::sort(retained.begin(), retained.end());

  OlsClusterResult res;
  for (Eigen::Index j = rank; j < X.cols(); ++j) res.dropped.push_back(static_cast<int>(perm[j]));
  std::sort(res.dropped.begin(), res.dropped.end());

  Eigen::MatrixXd Xr(X.rows(), retained.size());
  for (std::size_t j = 0; j < retained.size(); ++j) Xr.col(j) = X.col(retained[j]);
  const Eigen::VectorXd beta_r = Xr.householderQr().solve(y);
  const Eigen::VectorXd u = y - Xr * beta_r;

  int max_id = 0;
  for (int c : cluster) max_id = std::max(max_id, c + 1);
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(max_id, Xr.cols());
  std::vector<char> seen(max_id, 0);
  for (Eigen::Index i = 0; i < Xr.rows(); ++i) {
    scores.row(cluster[i]) += u[i] * Xr.row(i);
    seen[cluster[i]] = 1;
  }

  int g_used = 0;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(Xr.cols(), Xr.cols());
  for (int g = 0; g < max_id; ++g) {
    if (!seen[g]) continue;
    ++g_used;
    meat.noalias() += scores.row(g).transpose() * scores.row(g);
  }
  if (g_used < 2) throw ValidationError("ols_cluster: need at least 2 clusters");
  const double scale = static_cast<double>(g_used) / static_cast<double>(g_used - 1);

  const Eigen::MatrixXd xtx_inv =
      (Xr.transpose() * Xr).ldlt().solve(Eigen::MatrixXd::Identity(Xr.cols(), Xr.cols()));
  const Eigen::MatrixXd vcov = scale * xtx_inv * meat * xtx_inv;

  res.beta = Eigen::VectorXd::Zero(X.cols());
  res.se = Eigen::VectorXd::Constant(X.cols(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < retained.size(); ++j) {
    res.beta[retained[j]] = beta_r[j];
    res.se[retained[j]] = std::sqrt(vcov(j, j));
  }
  res.n_clusters = g_used;
  return res;
}

TwoStepResult two_step(const Panel& panel, const TwoStepOptions& opt) {
  const ExposureSeries grand =
      compute_exposure(panel, ExposureMode::grand, ExportMeasure::intensity, opt.pool);
  const EstimationSample sample = build_sample(panel, grand);

  Stage2Options s2opt = opt.stage2;
  s2opt.markov_only = true;
  s2opt.fe_region = false;  // fixed effects belong to the second step here
  s2opt.fe_industry = false;
  const PointFit fit = run_pipeline(sample, s2opt);

  TwoStepResult res;
  res.omega_tilde = fit.s2.omega_plus_const;
  res.step1_basis = fit.s2.basis_names;
  res.fe_region = opt.fe_region;
  res.fe_industry = opt.fe_industry;
  res.n_rows = static_cast<int>(sample.aligned.size());
  res.n_firms = sample.n_firms_aligned;

  // second-step design: intercept, lagged own X, lagged grand exposure, dummies
  std::vector<std::string> region_levels, industry_levels;
  if (opt.fe_region) {
    std::set<std::string> lv;
    for (const auto& a : sample.aligned) lv.insert(a.region);
    region_levels.assign(lv.begin(), lv.end());
  }
  if (opt.fe_industry) {
    std::set<std::string> lv;
    for (const auto& a : sample.aligned) lv.insert(a.industry);
    industry_levels.assign(lv.begin(), lv.end());
  }
  const int n_dum = (region_levels.empty() ? 0 : static_cast<int>(region_levels.size()) - 1) +
                    (industry_levels.empty() ? 0 : static_cast<int>(industry_levels.size()) - 1);
  Eigen::MatrixXd X(sample.aligned.size(), 3 + n_dum);
  Eigen::VectorXd y(sample.aligned.size());
  std::vector<int> cluster(sample.aligned.size());
  for (std::size_t i = 0; i < sample.aligned.size(); ++i) {
    const auto& a = sample.aligned[i];
    X(i, 0) = 1.0;
    X(i, 1) = a.x_lag;
    X(i, 2) = a.xbar_lag;
    int col = 3;
    for (std::size_t lv = 1; lv < region_levels.size(); ++lv, ++col)
      X(i, col) = a.region == region_levels[lv] ? 1.0 : 0.0;
    for (std::size_t lv = 1; lv < industry_levels.size(); ++lv, ++col)
      X(i, col) = a.industry == industry_levels[lv] ? 1.0 : 0.0;
    y[i] = res.omega_tilde[i];
    cluster[i] = a.firm_index;
  }

  const OlsClusterResult ols = ols_cluster(X, y, cluster);
  res.beta0 = ols.beta[0];
  res.beta_x = ols.beta[1];
  res.beta_xbar = ols.beta[2];
  res.se0 = ols.se[0];
  res.se_x = ols.se[1];
  res.se_xbar = ols.se[2];
  res.dropped_cols = ols.dropped;
  return res;
}

GrandAlgebra grand_average_algebra(double beta_x, double beta_xbar, double p_ii) {
  if (p_ii == 0.0) throw ValidationError("grand_average_algebra: p_ii must be nonzero");
  if (!(p_ii > 0.0 && p_ii <= 1.0))
    throw ValidationError("grand_average_algebra: p_ii must lie in (0,1]");
  GrandAlgebra g;
  g.lbe_implied = beta_x + beta_xbar * p_ii;
  g.spill_implied = beta_x / p_ii + beta_xbar;
  g.divergence_flag = p_ii < 0.05;
  return g;
}

}  // namespace exprod
