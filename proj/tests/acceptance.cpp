// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include "exprod/baselines.hpp"
#include "exprod/effects.hpp"
#include "exprod/inference.hpp"
#include "exprod/parallel.hpp"
#include "exprod/pipeline.hpp"
#include "exprod/rng.hpp"
#include "exprod/simulate.hpp"
#include "exprod/stats.hpp"

using namespace exprod;

namespace {

int g_threads = 2;

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Outcome> g_outcomes;

template <typename F>
void criterion(int id, const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{id, name, false, "", 0.0};
  try {
    o.pass = body(o.detail);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.seconds, o.detail.empty() ? "" : " -- ", o.detail.c_str());
  std::fflush(stdout);
  g_outcomes.push_back(std::move(o));
}

// pinned Monte Carlo DGP: spec values for (n, T, sigma_eta, elasticities, h),
// export-policy knobs chosen for identification strength (see README)
DgpConfig accept_cfg(std::uint64_t seed, double x_load = 0.25) {
  DgpConfig c;
  c.n_firms = 1000;
  c.n_periods = 10;
  c.seed = seed;
  c.sigma_zeta = 0.06;
  c.group_shift_t_sd = 0.25;
  c.x_noise_sd = 0.20;
  c.x_const = -0.10;
  c.x_load = x_load;
  return c;
}

EstimationSample sample_of(const Panel& panel) {
  const auto expo =
      compute_exposure(panel, ExposureMode::peer, ExportMeasure::intensity, PeerPool::region_industry);
  return build_sample(panel, expo);
}

struct SeedFit {
  DgpConfig cfg;
  SimResult sim;
  EstimationSample sample;
  PointFit fit;
  bool ok = false;
};

SeedFit fit_seed(const DgpConfig& cfg) {
  SeedFit sf;
  sf.cfg = cfg;
  sf.sim = simulate_panel(cfg, 1);
  sf.sample = sample_of(sf.sim.panel);
  sf.fit = run_pipeline(sf.sample, {});
  sf.ok = true;
  return sf;
}

double mean_of(const std::vector<double>& v) { return mean(v); }

// ---- criterion bodies -------------------------------------------------

bool c1_stage1(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_seeds = 50;
  std::vector<int> hit(n_seeds, 0);
  std::vector<int> identity_ok(n_seeds, 0);
  std::vector<double> thetas(n_seeds, 0.0);
  parallel_for(n_seeds, g_threads, [&](std::size_t s) {
    const DgpConfig cfg = accept_cfg(s + 1);
    const SimResult sim = simulate_panel(cfg, 1);
    const double ln_at = std::log(cfg.alpha_m) + 0.5 * cfg.sigma_eta * cfg.sigma_eta;
    bool ident = true;
    for (std::size_t i = 0; i < sim.panel.size(); ++i) {
      const auto& r = sim.panel.rows[i];
      const double ln_share = std::log(r.rel_price * r.M / r.Y);
      if (std::fabs(ln_share + sim.truth.eta[i] - ln_at) > 1e-12) ident = false;
    }
    identity_ok[s] = ident;
    const Stage1Result s1 = estimate_stage1(sample_of(sim.panel));
    hit[s] = std::fabs(s1.alpha_m - 0.30) < 0.01;
    thetas[s] = s1.theta;
  });
  const int hits = std::accumulate(hit.begin(), hit.end(), 0);
  const int idents = std::accumulate(identity_ok.begin(), identity_ok.end(), 0);
  double theta_min = 1e300;
  for (double t : thetas) theta_min = std::min(theta_min, t);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "identity %d/50, |alpha_m-0.30|<0.01 in %d/50, min theta %.6f",
                idents, hits, theta_min);
  detail = buf;
  return idents == 50 && hits >= 48 && theta_min >= 1.0 && secs < 60.0;  // stated budget: 1 minute
}

bool c2_stage2(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_seeds = 50;
  std::vector<int> hit(n_seeds, 0);
  parallel_for(n_seeds, g_threads, [&](std::size_t s) {
    const SeedFit sf = fit_seed(accept_cfg(100 + s));
    hit[s] = std::fabs(sf.fit.s2.alpha_k - 0.25) < 0.03 && std::fabs(sf.fit.s2.alpha_l - 0.45) < 0.03;
  });
  const int hits = std::accumulate(hit.begin(), hit.end(), 0);

  // zero-noise variant
  DgpConfig zcfg = accept_cfg(999);
  zcfg.n_firms = 400;
  zcfg.n_periods = 8;
  zcfg.sigma_eta = 0.0;
  zcfg.sigma_zeta = 0.0;
  const SeedFit zf = fit_seed(zcfg);
  const bool zero_ok = std::fabs(zf.fit.s1.alpha_m - zcfg.alpha_m) < 1e-6 &&
                       std::fabs(zf.fit.s2.alpha_k - zcfg.alpha_k) < 1e-6 &&
                       std::fabs(zf.fit.s2.alpha_l - zcfg.alpha_l) < 1e-6 &&
                       std::fabs(zf.fit.s2.gamma[1] - zcfg.rho) < 1e-6 &&
                       std::fabs(zf.fit.s2.gamma[3] - zcfg.b_x) < 1e-6 &&
                       std::fabs(zf.fit.s2.gamma[5] - zcfg.b_xbar) < 1e-6;

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[128];
  std::snprintf(buf, sizeof(buf), "recovery %d/50, zero-noise %s", hits, zero_ok ? "ok" : "FAILED");
  detail = buf;
  return hits >= 45 && zero_ok && secs < 600.0;  // stated budget: 10 minutes
}

bool c3_effects(std::string& detail) {
  std::string parts;
  bool all_ok = true;
  for (const auto& [label, x_load] : {std::pair<const char*, double>{"weak", 0.05},
                                      std::pair<const char*, double>{"strong", 0.6}}) {
    const int n_seeds = 50;
    std::vector<int> hit(n_seeds, 0);
    parallel_for(n_seeds, g_threads, [&](std::size_t s) {
      const SeedFit sf = fit_seed(accept_cfg(200 + s, x_load));
      const EffectsTable t = compute_effects(sf.fit.s2, sf.sample);
      double lbe = 0, lfe = 0;
      for (const auto& r : t.rows) {
        lbe += r.lbe;
        lfe += r.lfe;
      }
      lbe /= t.rows.size();
      lfe /= t.rows.size();
      hit[s] = std::fabs(lbe - sf.cfg.b_x) < 0.05 && std::fabs(lfe - sf.cfg.b_xbar) < 0.05;
    });
    const int hits = std::accumulate(hit.begin(), hit.end(), 0);
    parts += std::string(label) + " " + std::to_string(hits) + "/50 ";
    all_ok = all_ok && hits >= 45;
  }
  detail = parts;
  return all_ok;
}

bool c4_gradients(std::string& detail) {
  for (const bool fe : {false, true}) {
    const SeedFit sf = [&] {
      DgpConfig cfg = accept_cfg(321);
      cfg.n_firms = 400;
      cfg.n_periods = 6;
      SeedFit out;
      out.cfg = cfg;
      out.sim = simulate_panel(cfg, 1);
      out.sample = sample_of(out.sim.panel);
      Stage2Options opt;
      opt.fe_region = fe;
      out.fit = run_pipeline(out.sample, opt);
      return out;
    }();
    const EffectsTable t = compute_effects(sf.fit.s2, sf.sample);
    for (std::size_t i = 0; i < sf.sample.aligned.size(); ++i) {
      const auto& a = sf.sample.aligned[i];
      const double w = sf.fit.s2.w_hat[i];
      auto fd = [&](int which) {
        const double h = 1e-5;
        const double wp = which == 0 ? w + h : w, wm = which == 0 ? w - h : w;
        const double xp = which == 1 ? a.x_lag + h : a.x_lag, xm = which == 1 ? a.x_lag - h : a.x_lag;
        const double bp = which == 2 ? a.xbar_lag + h : a.xbar_lag,
                     bm = which == 2 ? a.xbar_lag - h : a.xbar_lag;
        return (g_value(sf.fit.s2, wp, xp, bp) - g_value(sf.fit.s2, wm, xm, bm)) / (2 * h);
      };
      auto close = [](double analytic, double numeric) {
        const double tol = std::max(1e-9, 1e-6 * std::fabs(numeric));
        return std::fabs(analytic - numeric) <= tol;
      };
      if (!close(t.rows[i].persistence, fd(0)) || !close(t.rows[i].lbe, fd(1)) ||
          !close(t.rows[i].lfe, fd(2))) {
        detail = "row " + std::to_string(i) + " mismatch (fe=" + (fe ? "on" : "off") + ")";
        return false;
      }
    }
  }
  detail = "all rows, fe off and on";
  return true;
}

bool c5_separability(std::string& detail) {
  DgpConfig cfg = accept_cfg(654);
  cfg.n_firms = 300;
  cfg.n_periods = 6;
  const SeedFit sf = fit_seed(cfg);
  const auto expo = compute_exposure(sf.sim.panel, ExposureMode::peer, ExportMeasure::intensity,
                                     PeerPool::region_industry);
  Rng rng(7, 1);
  int tested = 0;
  for (std::size_t i = 0; i < sf.sample.aligned.size() && tested < 100; ++i) {
    const auto& a = sf.sample.aligned[i];
    if (a.n_lag < 1) continue;
    ++tested;
    const std::size_t lag_row = a.obs_index - 1;
    Panel perturbed = sf.sim.panel;
    perturbed.rows[lag_row].X = rng.uniform();
    const auto expo2 = compute_exposure(perturbed, ExposureMode::peer, ExportMeasure::intensity,
                                        PeerPool::region_industry);
    if (expo2.xbar[lag_row] != expo.xbar[lag_row]) {
      detail = "xbar changed bitwise at row " + std::to_string(lag_row);
      return false;
    }
    // exposure channel contributes exactly zero to dg/dX
    const double x_new = perturbed.rows[lag_row].X;
    const double g_fixed = g_value(sf.fit.s2, sf.fit.s2.w_hat[i], x_new, a.xbar_lag);
    const double g_recomputed = g_value(sf.fit.s2, sf.fit.s2.w_hat[i], x_new, expo2.xbar[lag_row]);
    if (g_fixed != g_recomputed) {
      detail = "exposure channel leaked into g at row " + std::to_string(i);
      return false;
    }
  }
  detail = std::to_string(tested) + " perturbed rows bit-stable";
  return tested == 100;
}

bool c6_long_run(std::string& detail) {
  const LongRunReport r = long_run(0.363, 0.324, 0.482);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "lbe_lr=%.4f lfe_lr=%.4f total=%.3f", r.lbe_long_run,
                r.lfe_long_run, r.total_per_10pp);
  detail = buf;
  return std::fabs(r.lbe_long_run - 0.701) < 0.005 && std::fabs(r.lfe_long_run - 0.627) < 0.005 &&
         std::fabs(r.total_per_10pp - 13.3) < 0.05;
}

bool c7_bootstrap(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  // (a) q0 = 0, c = 0 collapses to the plain percentile interval exactly;
  //     "plain" ranks derive from the level by the same arithmetic
  std::vector<double> reps(100);
  std::iota(reps.begin(), reps.end(), 1.0);
  const double level = 0.95;
  const IntervalEstimate iv = bca_interval(50.5, reps, 0.0, level);
  const double rank_lo = 0.5 * (1.0 - level);
  const bool plain_ok = iv.lo == percentile_linear(reps, rank_lo) &&
                        iv.hi == percentile_linear(reps, 1.0 - rank_lo) && iv.q0 == 0.0;

  // (b) fixed-seed determinism, bit-exact
  DgpConfig dcfg = accept_cfg(777);
  dcfg.n_firms = 150;
  dcfg.n_periods = 6;
  const SeedFit sf = fit_seed(dcfg);
  const BootstrapSet b1 = wild_bootstrap(sf.sample, sf.fit, 16, 42, {}, g_threads);
  const BootstrapSet b2 = wild_bootstrap(sf.sample, sf.fit, 16, 42, {}, 1);
  bool det_ok = b1.scalars.size() == b2.scalars.size();
  for (std::size_t r = 0; det_ok && r < b1.scalars.size(); ++r)
    for (std::size_t j = 0; j < b1.scalars[r].size(); ++j) {
      const double x = b1.scalars[r][j], y = b2.scalars[r][j];
      if (std::isnan(x) && std::isnan(y)) continue;
      if (x != y) {
        det_ok = false;
        break;
      }
    }

  // (c) desk-scale coverage study: B=200, 100 Monte Carlo repetitions,
  //     n_firms=300, T=8, BCa with jackknife acceleration (delete-20)
  const int n_reps = 100;
  std::vector<int> covered(n_reps, 0);
  std::vector<int> failed(n_reps, 0);
  parallel_for(n_reps, g_threads, [&](std::size_t r) {
    try {
      DgpConfig cfg = accept_cfg(5000 + r);
      cfg.n_firms = 300;
      cfg.n_periods = 8;
      const SeedFit rf = fit_seed(cfg);
      const BootstrapSet bs = wild_bootstrap(rf.sample, rf.fit, 200, 9000 + r, {}, 1);
      const JackknifeSet jk = jackknife_pipeline(rf.sample, rf.fit, 20, {}, 1);
      const EstimandSet point = compute_estimands(rf.sample, rf.fit);
      const IntervalSet ivs = make_intervals(point, bs, &jk);
      for (std::size_t j = 0; j < ivs.names.size(); ++j)
        if (ivs.names[j] == "alpha_k")
          covered[r] = ivs.intervals[j].lo <= cfg.alpha_k && cfg.alpha_k <= ivs.intervals[j].hi;
    } catch (const std::exception&) {
      failed[r] = 1;
    }
  });
  const int cover = std::accumulate(covered.begin(), covered.end(), 0);
  const int fails = std::accumulate(failed.begin(), failed.end(), 0);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "percentile-collapse %s, determinism %s, coverage %d/100 (%d errors)",
                plain_ok ? "ok" : "FAILED", det_ok ? "ok" : "FAILED", cover, fails);
  detail = buf;
  // stated budget: 2 hours on 8 workers
  return plain_ok && det_ok && cover >= 85 && cover <= 100 && fails == 0 && secs < 7200.0;
}

bool c8_jensen(std::string& detail) {
  // theta >= 1 on every dataset this suite generates; strict when shares vary
  int checked = 0;
  bool ok = true;
  for (std::uint64_t s = 1; s <= 25 && ok; ++s) {
    DgpConfig cfg = accept_cfg(s);
    cfg.n_firms = 200;
    cfg.n_periods = 6;
    const SimResult sim = simulate_panel(cfg, 1);
    const Stage1Result s1 = estimate_stage1(sample_of(sim.panel));
    ok = s1.theta > 1.0;  // sigma_eta > 0: shares vary, strict inequality
    ++checked;
  }
  // degenerate case: constant shares give theta == 1
  DgpConfig flat = accept_cfg(3);
  flat.n_firms = 100;
  flat.n_periods = 4;
  flat.sigma_eta = 0.0;
  const Stage1Result s1 = estimate_stage1(sample_of(simulate_panel(flat, 1).panel));
  const bool flat_ok = std::fabs(s1.theta - 1.0) < 1e-12;
  detail = std::to_string(checked) + " noisy datasets strict, constant-share theta == 1";
  return ok && flat_ok;
}

bool c9_grand_average(std::string& detail) {
  Rng rng(31, 1);
  // constant group size N = 8, 12 groups, synthetic outcome
  const int n_groups = 12, m = 8;
  std::vector<FirmYear> rows;
  for (int g = 0; g < n_groups; ++g)
    for (int i = 0; i < m; ++i) {
      FirmYear r;
      r.firm_id = "F" + std::to_string(g * 100 + i);
      r.year = 1995;
      r.Y = 100;
      r.K = 50;
      r.L = 10;
      r.M = 29;
      r.X = rng.uniform();
      r.region = "R" + std::to_string(g);
      r.industry = "I1";
      rows.push_back(r);
    }
  const Panel p = make_panel(std::move(rows));
  const auto peer =
      compute_exposure(p, ExposureMode::peer, ExportMeasure::intensity, PeerPool::region_industry);
  const auto grand =
      compute_exposure(p, ExposureMode::grand, ExportMeasure::intensity, PeerPool::region_industry);

  const int n = static_cast<int>(p.size());
  Eigen::MatrixXd Xp(n, 3), Xg(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    Xp(i, 0) = Xg(i, 0) = 1.0;
    Xp(i, 1) = Xg(i, 1) = p.rows[i].X;
    Xp(i, 2) = peer.xbar[i];
    Xg(i, 2) = grand.xbar[i];
    y(i) = 0.7 + 0.35 * p.rows[i].X + 0.9 * peer.xbar[i] + 0.1 * rng.normal();
  }
  const Eigen::VectorXd bp = Xp.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd bg = Xg.colPivHouseholderQr().solve(y);
  const double fit_diff = (Xp * bp - Xg * bg).cwiseAbs().maxCoeff();
  const double coef_diff = std::fabs(bp[1] - (bg[1] + bg[2] / m));
  const GrandAlgebra ga = grand_average_algebra(bg[1], bg[2], 1.0 / m);
  const bool algebra_exact = ga.lbe_implied == bg[1] + bg[2] * (1.0 / m);

  char buf[128];
  std::snprintf(buf, sizeof(buf), "max fitted diff %.2e, coef identity diff %.2e", fit_diff,
                coef_diff);
  detail = buf;
  return fit_diff <= 1e-10 && coef_diff <= 1e-10 && algebra_exact;
}

bool c10_two_step(std::string& detail) {
  // (a) exogenous omega and exogenous exporting: betas within 2 cluster se of 0
  const int n_seeds = 50;
  std::vector<int> hit(n_seeds, 0);
  parallel_for(n_seeds, g_threads, [&](std::size_t s) {
    DgpConfig cfg = accept_cfg(400 + s, 0.0);  // x_load = 0
    cfg.n_firms = 600;
    cfg.n_periods = 8;
    cfg.b_x = 0.0;
    cfg.b_xbar = 0.0;
    const SimResult sim = simulate_panel(cfg, 1);
    const TwoStepResult ts = two_step(sim.panel, {});
    hit[s] = std::fabs(ts.beta_x) < 2.0 * ts.se_x && std::fabs(ts.beta_xbar) < 2.0 * ts.se_xbar;
  });
  const int hits = std::accumulate(hit.begin(), hit.end(), 0);

  // (b) genuine LFE with small peer groups: grand beta_x is contaminated and
  //     does not equal the structural mean LBE
  DgpConfig cfg = accept_cfg(4242);
  cfg.n_regions = 20;
  cfg.n_industries = 10;  // ~5 firms per cell, p_ii ~ 0.2
  cfg.b_xbar = 0.5;
  const SeedFit sf = fit_seed(cfg);
  const EffectsTable t = compute_effects(sf.fit.s2, sf.sample);
  double mean_lbe = 0;
  for (const auto& r : t.rows) mean_lbe += r.lbe;
  mean_lbe /= t.rows.size();
  const TwoStepResult ts = two_step(sf.sim.panel, {});
  const double gap = std::fabs(ts.beta_x - mean_lbe);
  const bool contaminated = gap > 2.0 * ts.se_x && gap > 0.02;

  char buf[160];
  std::snprintf(buf, sizeof(buf), "exogenous null %d/50, contamination gap %.3f (2se=%.3f)", hits,
                gap, 2.0 * ts.se_x);
  detail = buf;
  return hits >= 45 && contaminated;
}

bool c11_quantile_premium(std::string& detail) {
  Rng rng(51, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 10 + static_cast<int>(rng.below(50));
    std::vector<double> x(n);
    for (auto& v : x) v = 2.0 * rng.normal();
    for (double tau : {0.25, 0.5, 0.75}) {
      const double q = quantile_lower(x, tau);
      auto loss = [&](double c) {
        double l = 0;
        for (double v : x) {
          const double u = v - c;
          l += u * (tau - (u < 0 ? 1.0 : 0.0));
        }
        return l;
      };
      const double lo = *std::min_element(x.begin(), x.end());
      const double hi = *std::max_element(x.begin(), x.end());
      double best = 1e300;
      for (double g = lo; g <= hi; g += 1e-3) best = std::min(best, loss(g));
      if (loss(q) > best + 1e-9) {
        detail = "closed form beaten by the grid at trial " + std::to_string(trial);
        return false;
      }
    }
  }
  detail = "20 samples x 3 quantiles";
  return true;
}

bool c12_dominance(std::string& detail) {
  const int n_seeds = 50;
  const int n_firms = 2000;
  std::vector<int> accept_hit(n_seeds, 0), reject_hit(n_seeds, 0);
  parallel_for(n_seeds, g_threads, [&](std::size_t s) {
    Rng rng(9000 + s, 1);
    // dispersion matches realistic log-productivity spreads; a 0.3 shift is a
    // clear 1.5-sigma dominance gap, so tail crossings stay rare
    std::vector<double> base(n_firms);
    for (auto& v : base) v = 0.2 * rng.normal();
    std::vector<double> omega_up, omega_dn;
    std::vector<char> exporter;
    std::vector<int> firm;
    for (int f = 0; f < n_firms; ++f) {
      const bool is_exp = f % 2 == 0;
      omega_up.push_back(base[f] + (is_exp ? 0.3 : 0.0));
      omega_dn.push_back(base[f] - (is_exp ? 0.3 : 0.0));
      exporter.push_back(is_exp);
      firm.push_back(f);
    }
    DominanceConfig cfg;
    cfg.R = 500;
    cfg.seed = 70000 + s;
    cfg.threads = 1;
    const DominanceResult up = dominance_test(omega_up, exporter, firm, cfg);
    const DominanceResult dn = dominance_test(omega_dn, exporter, firm, cfg);
    accept_hit[s] = up.p_value > 0.5;
    reject_hit[s] = dn.p_value < 0.05;
  });
  const int acc = std::accumulate(accept_hit.begin(), accept_hit.end(), 0);
  const int rej = std::accumulate(reject_hit.begin(), reject_hit.end(), 0);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fail-to-reject %d/50, reject %d/50", acc, rej);
  detail = buf;
  return acc >= 45 && rej >= 45;
}

}  // namespace

int main(int argc, char** argv) {
  g_threads = default_threads();
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) g_threads = std::atoi(argv[++i]);
  }
  std::printf("acceptance suite, %d worker threads\n", g_threads);

  criterion(1, "stage-1 share identity and alpha_M recovery", c1_stage1);
  criterion(2, "stage-2 elasticity recovery and zero-noise exactness", c2_stage2);
  criterion(3, "effects recovery under weak and strong selection", c3_effects);
  criterion(4, "analytic gradients match central finite differences", c4_gradients);
  criterion(5, "peer-exposure separability is bit-exact", c5_separability);
  criterion(6, "long-run multiplier arithmetic", c6_long_run);
  criterion(7, "bootstrap percentile collapse, determinism, coverage", c7_bootstrap);
  criterion(8, "Jensen bound theta >= 1", c8_jensen);
  criterion(9, "grand/peer average regression algebra", c9_grand_average);
  criterion(10, "two-step comparator null and cross-contamination", c10_two_step);
  criterion(11, "quantile premium equals check-function minimizer", c11_quantile_premium);
  criterion(12, "dominance test calibration", c12_dominance);

  int failures = 0;
  double total = 0;
  for (const auto& o : g_outcomes) {
    failures += o.pass ? 0 : 1;
    total += o.seconds;
  }
  std::printf("%d of %zu criteria passed (total %.1fs)\n", static_cast<int>(g_outcomes.size()) - failures,
              g_outcomes.size(), total);
  return failures == 0 ? 0 : 1;
}
