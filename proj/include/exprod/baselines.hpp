#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exprod/inference.hpp"
#include "exprod/panel.hpp"
#include "exprod/stage2.hpp"

namespace exprod {

// Exporter-premium diagnostics on recovered log-productivity. Quantile premia
// use the closed form for a binary regressor: beta0(tau) is the non-exporter
// tau-quantile, beta1(tau) the exporter/non-exporter quantile difference.
struct PremiumReport {
  double mean_diff = 0;
  std::vector<double> taus;
  std::vector<double> beta0, beta1;
  std::size_t n_exporters = 0, n_non = 0;
};

PremiumReport premium(std::span<const double> omega, std::span<const char> exporter,
                      std::span<const double> taus);

// One-sided Kolmogorov-Smirnov-type statistic for the null that exporters'
// productivity first-order dominates non-exporters', with a firm-level
// subsampling p-value. This is the simplified one-sided KS with subsampling,
// not the full recentered Linton-Maasoumi-Whang test.
struct DominanceConfig {
  int R = 500;              // subsample draws
  int b = 0;                // firms per subsample; 0 = floor(n_firms^0.7)
  std::uint64_t seed = 0;
  int threads = 1;
};

struct DominanceResult {
  double statistic = 0;
  double p_value = 0;
  int b_used = 0;
  int R_used = 0;
  int skipped = 0;  // subsamples with an empty group
};

DominanceResult dominance_test(std::span<const double> omega, std::span<const char> exporter,
                               std::span<const int> firm_of_row, const DominanceConfig& cfg);

// Cluster-robust OLS (sandwich with a G/(G-1) scaling). Collinear columns are
// pivoted out: their coefficients are 0, their standard errors NaN, and the
// indices are reported.
struct OlsClusterResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  std::vector<int> dropped;
  int n_clusters = 0;
};

OlsClusterResult ols_cluster(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             std::span<const int> cluster);

// Internally-inconsistent two-step comparator: step 1 re-runs the pipeline
// with the sieve restricted to (1, W, W^2) (exogenous Markov), step 2 regresses
// the recovered productivity on lagged own X and the lagged grand-average
// exposure, standard errors clustered by firm.
struct TwoStepResult {
  std::vector<double> omega_tilde;  // first-step productivity, per aligned row
  double beta0 = 0, beta_x = 0, beta_xbar = 0;
  double se0 = 0, se_x = 0, se_xbar = 0;
  std::vector<std::string> step1_basis;  // never contains X or Xbar columns
  std::string exposure_mode = "grand";
  bool fe_region = false, fe_industry = false;
  std::vector<int> dropped_cols;
  int n_rows = 0, n_firms = 0;
};

struct TwoStepOptions {
  bool fe_region = false;
  bool fe_industry = false;
  PeerPool pool = PeerPool::region_industry;
  Stage2Options stage2;  // markov restriction applied internally
};

TwoStepResult two_step(const Panel& panel, const TwoStepOptions& opt = {});

// Identities linking grand-average regression coefficients to the structural
// effects: LBE = beta_x + beta_xbar * p_ii; the implied "spillover"
// beta_x / p_ii + beta_xbar diverges as p_ii -> 0 (flagged below 0.05).
// p_ii must lie in (0, 1].
struct GrandAlgebra {
  double lbe_implied = 0;
  double spill_implied = 0;
  bool divergence_flag = false;
};

GrandAlgebra grand_average_algebra(double beta_x, double beta_xbar, double p_ii);

}  // namespace exprod
