#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exprod/panel.hpp"

namespace exprod {

// Structural data-generating process. Capital/labor follow the laws of motion
// with log-linear policy rules decided one period ahead; the export intensity
// is chosen contemporaneously with productivity (increasing in it); materials
// solve the static first-order condition in closed form, so the share identity
// ln S^M = ln(alpha_M * theta) - eta holds exactly on every generated row.
struct DgpConfig {
  int n_firms = 500;
  int n_periods = 10;  // emitted periods, after burn-in
  int burn_in = 20;
  std::uint64_t seed = 1;
  int start_year = 1995;

  // technology
  double alpha0 = 0.0;  // ln A0
  double alpha_k = 0.25;
  double alpha_l = 0.45;
  double alpha_m = 0.30;
  double delta = 0.10;

  // productivity law h(w, x, xbar) = h_const + rho*w + b_x*x + b_xbar*xbar
  //   + c_ww*w^2 + c_xx*x^2 + c_xbxb*xbar^2 + c_wx*w*x + c_wxb*w*xbar + c_xxb*x*xbar
  double h_const = 0.0;
  double rho = 0.5;
  double b_x = 0.3;
  double b_xbar = 0.2;
  double c_ww = 0.0, c_xx = 0.0, c_xbxb = 0.0, c_wx = 0.0, c_wxb = 0.0, c_xxb = 0.0;
  double sigma_zeta = 0.08;  // innovation sd
  double sigma_eta = 0.10;   // transitory shock sd

  // export policy: latent = x_const + x_persist*X_{t-1} + x_load*omega_t
  //   + group_shift + x_noise_sd*eps; X_t = latent < x_threshold ? 0 : clamp(latent, 0, 1).
  // Defaults produce roughly a 21% exporter share.
  double x_const = -0.17;
  double x_persist = 0.55;
  double x_load = 0.25;  // self-selection strength
  double x_noise_sd = 0.15;
  double x_threshold = 0.08;
  double group_shift_sd = 0.05;    // persistent per-(region,industry) export climate, N(0, sd)
  double group_shift_t_sd = 0.20;  // fresh per-(cell, period) export-climate component

  // investment, chosen at t: I_t = exp(inv_const + inv_k*ln K_t + inv_omega*omega_t + inv_noise_sd*eps)
  double inv_const = -2.30;
  double inv_k = 1.0;
  double inv_omega = 0.5;
  double inv_noise_sd = 0.30;

  // hiring, chosen at t: ln L_{t+1} = lab_const + lab_persist*ln L_t + lab_omega*omega_t + lab_noise_sd*eps
  double lab_const = 0.30;
  double lab_persist = 0.90;
  double lab_omega = 0.30;
  double lab_noise_sd = 0.20;

  // initial conditions (logs)
  double k0_mean = 2.0, k0_sd = 0.5;
  double l0_mean = 3.0, l0_sd = 0.5;

  // group structure
  int n_regions = 10;
  int n_industries = 10;
  std::vector<double> region_probs;    // empty = uniform
  std::vector<double> industry_probs;  // empty = uniform

  std::vector<double> rel_price_series;  // cycled over periods; empty = all 1.0

  void validate() const;  // throws ValidationError on an ill-posed config
};

// Hidden truth retained for oracle tests, parallel to Panel rows.
struct SimTruth {
  std::vector<double> omega, eta, zeta;
};

struct SimResult {
  Panel panel;
  SimTruth truth;
};

SimResult simulate_panel(const DgpConfig& cfg, int threads = 1);

struct TrueEffects {
  double lbe = 0;          // dh/dX at the point
  double lfe = 0;          // dh/dXbar
  double persistence = 0;  // dh/domega
};

// Analytic partials of the configured h at (omega, x, xbar).
TrueEffects oracle_effects(const DgpConfig& cfg, double omega, double x, double xbar);

double dgp_theta(const DgpConfig& cfg);  // exp(sigma_eta^2 / 2)

// Flat key=value config file; '#' starts a comment. Unknown keys are errors.
DgpConfig load_dgp_config(const std::string& path);
void write_truth_csv(const Panel& panel, const SimTruth& truth, const std::string& path);

}  // namespace exprod
