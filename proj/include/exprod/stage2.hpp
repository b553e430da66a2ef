#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "exprod/panel.hpp"
#include "exprod/stage1.hpp"

namespace exprod {

struct Stage2Options {
  bool fe_region = false;
  bool fe_industry = false;
  bool markov_only = false;  // restrict the sieve to (1, W, W^2); exogenous-Markov first step
  int n_starts = 8;          // grid over (0,1)^2, at most 9
  double rel_sse_tol = 1e-10;
  double simplex_tol = 1e-8;
  int max_evals_per_start = 2000;
  double pivot_rel_tol = 1e-10;  // relative pivot threshold of the inner solve
  int threads = 1;               // multistart replicas run concurrently
};

// Fixed column order of the degree-2 sieve; dummy columns follow.
// 0:1  1:W  2:W^2  3:X  4:X^2  5:Xbar  6:Xbar^2  7:W*X  8:W*Xbar  9:X*Xbar
inline constexpr int kSieveDim = 10;

struct StartReport {
  double alpha_k = 0, alpha_l = 0;
  double sse = 0;
  int evals = 0;
  bool converged = false;
  bool boundary = false;  // either elasticity within 1e-3 of 0
  bool box_exit = false;  // ended outside (0,1)^2
};

struct ConvergenceReport {
  std::vector<StartReport> starts;
  int chosen_start = -1;
  int total_evals = 0;
  std::vector<int> dropped_columns;  // pivoted out of the final inner solve
};

struct Stage2Result {
  double alpha_k = 0, alpha_l = 0;
  Eigen::VectorXd gamma;  // kSieveDim + dummy columns; dropped entries are 0
  std::vector<std::string> basis_names;
  std::vector<double> w_hat;             // per aligned row, W at the fitted alpha
  std::vector<double> g_hat;             // per aligned row, fitted sieve value
  std::vector<double> omega_plus_const;  // y - aK*k - aL*l - aM*m - eta
  std::vector<double> resid;             // composite zeta+eta residual
  std::vector<double> zeta;              // resid - eta
  double sse = 0;
  ConvergenceReport convergence;
  bool fe_region = false, fe_industry = false;
  std::vector<std::string> region_levels, industry_levels;  // level 0 = reference
};

struct InnerSolve {
  Eigen::VectorXd gamma;
  double sse = 0;
  std::vector<int> dropped;
};

// Exact linear least squares by column-pivoted Householder QR; columns whose
// pivot falls below pivot_rel_tol relative to the largest are dropped (their
// coefficients set to 0) and reported. Throws if fewer than 3 columns survive.
InnerSolve solve_projected(const Eigen::MatrixXd& basis, const Eigen::VectorXd& target,
                           double pivot_rel_tol = 1e-10);

// Basis evaluated at lagged values with W(alpha) = m*_{t-1} - aK*k_{t-1} - aL*l_{t-1}.
struct BasisSpec {
  std::vector<std::string> names;
  std::vector<std::string> region_levels, industry_levels;
  bool fe_region = false, fe_industry = false;
  bool markov_only = false;
  int dim() const { return static_cast<int>(names.size()); }
};

BasisSpec make_basis_spec(const EstimationSample& sample, const Stage2Options& opt);

Eigen::MatrixXd build_basis(const EstimationSample& sample, const TransformedSample& ts,
                            const BasisSpec& spec, double alpha_k, double alpha_l);

// Inner solve of the variable projection at fixed (alpha_K, alpha_L):
// gamma minimizing sum (y* - aK*k - aL*l - basis'gamma)^2.
std::pair<InnerSolve, Eigen::VectorXd> concentrated_sse(double alpha_k, double alpha_l,
                                                        const EstimationSample& sample,
                                                        const TransformedSample& ts,
                                                        const BasisSpec& spec,
                                                        double pivot_rel_tol = 1e-10);

Stage2Result fit_stage2(const EstimationSample& sample, const TransformedSample& ts,
                        const Stage1Result& s1, const Stage2Options& opt = {});

}  // namespace exprod
