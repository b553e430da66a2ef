#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "exprod/errors.hpp"
#include "exprod/inference.hpp"
#include "exprod/rng.hpp"
#include "exprod/simulate.hpp"
#include "exprod/stats.hpp"
#include "test_util.hpp"

using namespace exprod;

namespace {

struct Fitted {
  EstimationSample sample;
  PointFit fit;
};

Fitted fitted_sim(DgpConfig cfg) {
  const SimResult sim = simulate_panel(cfg, 2);
  const auto expo = compute_exposure(sim.panel, ExposureMode::peer, ExportMeasure::intensity,
                                     PeerPool::region_industry);
  Fitted f;
  f.sample = build_sample(sim.panel, expo);
  f.fit = run_pipeline(f.sample, {});
  return f;
}

}  // namespace

TEST_CASE("bca_interval basics") {
  SUBCASE("exactly B/2 replicates below the point gives q0 = 0") {
    std::vector<double> reps(100);
    std::iota(reps.begin(), reps.end(), 1.0);  // 1..100
    const IntervalEstimate iv = bca_interval(50.5, reps, 0.0, 0.95);
    CHECK(iv.q0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK_FALSE(iv.clamped);
  }
  SUBCASE("q0 = 0 and c = 0 collapse to the plain percentile interval") {
    Rng rng(5, 1);
    std::vector<double> reps(200);
    for (auto& v : reps) v = rng.normal();
    std::vector<double> sorted = reps;
    const double med = percentile_linear(sorted, 0.5);
    const IntervalEstimate iv = bca_interval(med, reps, 0.0, 0.95);
    // q0 may not be exactly 0 here; force the collapse case with a symmetric count
    std::vector<double> sym(100);
    std::iota(sym.begin(), sym.end(), 1.0);
    const IntervalEstimate ivs = bca_interval(50.5, sym, 0.0, 0.95);
    CHECK(ivs.lo == doctest::Approx(percentile_linear(sym, 0.025)).epsilon(1e-12));
    CHECK(ivs.hi == doctest::Approx(percentile_linear(sym, 0.975)).epsilon(1e-12));
  }
  SUBCASE("frozen reference values for replicates 1..100, point 50.5") {
    std::vector<double> reps(100);
    std::iota(reps.begin(), reps.end(), 1.0);
    const IntervalEstimate iv = bca_interval(50.5, reps, 0.0, 0.95);
    // p*(B-1) percentile rule evaluated by hand: 3.475 and 97.525
    CHECK(iv.lo == doctest::Approx(3.475).epsilon(1e-12));
    CHECK(iv.hi == doctest::Approx(97.525).epsilon(1e-12));
  }
  SUBCASE("all replicates on one side clamps q0 and flags it") {
    std::vector<double> reps(50, 1.0);
    const IntervalEstimate iv = bca_interval(0.0, reps, 0.0, 0.95);
    CHECK(iv.clamped);
    CHECK(std::isfinite(iv.q0));
  }
  SUBCASE("widening the level never shrinks the interval") {
    Rng rng(7, 1);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> reps(150);
      for (auto& v : reps) v = rng.normal(0.3, 1.2);
      const double point = reps[trial];
      const double c = 0.05 * rng.normal();
      const IntervalEstimate iv90 = bca_interval(point, reps, c, 0.90);
      const IntervalEstimate iv95 = bca_interval(point, reps, c, 0.95);
      CHECK(iv95.lo <= iv90.lo + 1e-12);
      CHECK(iv95.hi >= iv90.hi - 1e-12);
    }
  }
}

TEST_CASE("jackknife acceleration formula") {
  SUBCASE("symmetric estimates give c = 0 exactly") {
    const std::vector<double> z = {1.0, 2.0, 3.0};
    const Acceleration a = jackknife_acceleration(z);
    CHECK(a.c == 0.0);
    CHECK_FALSE(a.degenerate);
  }
  SUBCASE("hand-evaluated reference for {1, 2, 6}") {
    const std::vector<double> z = {1.0, 2.0, 6.0};
    const Acceleration a = jackknife_acceleration(z);
    // zbar = 3; devs (2, 1, -3); sum^3 = -18; sum^2 = 14
    // c = -18 / (6 * 14^{3/2}) = -0.05727026612409094
    CHECK(a.c == doctest::Approx(-0.05727026612409094).epsilon(1e-13));
  }
  SUBCASE("constant estimates: c = 0 with the degenerate flag") {
    const std::vector<double> z = {2.5, 2.5, 2.5, 2.5};
    const Acceleration a = jackknife_acceleration(z);
    CHECK(a.c == 0.0);
    CHECK(a.degenerate);
  }
}

TEST_CASE("regeneration preserves within-firm residual sign structure") {
  DgpConfig cfg;
  cfg.n_firms = 120;
  cfg.n_periods = 6;
  cfg.seed = 3;
  const Fitted f = fitted_sim(cfg);

  const std::vector<double> w = wild_weights(99, 0, f.sample.n_firms);
  const EstimationSample rep = regenerate_outcomes(f.sample, f.fit, w);

  for (std::size_t i = 0; i < rep.all_rows.size(); ++i) {
    const double eta_b = f.fit.s1.ln_alpham_theta - rep.all_rows[i].ln_share;
    const double wi = w[rep.all_rows[i].firm_index];
    CHECK(eta_b == doctest::Approx(wi * f.fit.s1.eta[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < rep.aligned.size(); ++i) {
    const auto& a = rep.aligned[i];
    const double fitted = f.fit.s2.alpha_k * a.k + f.fit.s2.alpha_l * a.l +
                          f.fit.s1.alpha_m * a.m + f.fit.s2.g_hat[i];
    const double resid_b = a.y - fitted;
    const double orig = f.fit.s2.zeta[i] + f.fit.ts.eta_cur[i];
    CHECK(resid_b == doctest::Approx(w[a.firm_index] * orig).epsilon(1e-10));
  }
}

TEST_CASE("zero-residual data: every replicate reproduces the point estimates") {
  DgpConfig cfg;
  cfg.n_firms = 200;
  cfg.n_periods = 6;
  cfg.sigma_eta = 0.0;
  cfg.sigma_zeta = 0.0;
  cfg.seed = 5;
  const Fitted f = fitted_sim(cfg);

  const BootstrapSet bs = wild_bootstrap(f.sample, f.fit, 8, 7, {}, 2);
  CHECK(bs.failures == 0);
  const EstimandSet point = compute_estimands(f.sample, f.fit);
  REQUIRE(bs.scalars.size() == 8);
  for (const auto& rep : bs.scalars) {
    for (std::size_t j = 0; j < point.values.size(); ++j) {
      if (std::isnan(point.values[j])) continue;
      CHECK(rep[j] == doctest::Approx(point.values[j]).scale(1.0).epsilon(5e-6));
    }
  }
  // intervals collapse onto the point
  const IntervalSet iv = make_intervals(point, bs);
  for (std::size_t j = 0; j < iv.intervals.size(); ++j) {
    if (std::isnan(point.values[j])) continue;
    CHECK(iv.intervals[j].hi - iv.intervals[j].lo <= 5e-6 * (1.0 + std::fabs(point.values[j])));
  }
}

TEST_CASE("bootstrap determinism: same seed bit-identical, thread-count independent") {
  DgpConfig cfg;
  cfg.n_firms = 100;
  cfg.n_periods = 5;
  cfg.seed = 11;
  const Fitted f = fitted_sim(cfg);

  const BootstrapSet a = wild_bootstrap(f.sample, f.fit, 10, 1234, {}, 1);
  const BootstrapSet b = wild_bootstrap(f.sample, f.fit, 10, 1234, {}, 2);
  REQUIRE(a.scalars.size() == b.scalars.size());
  for (std::size_t r = 0; r < a.scalars.size(); ++r) {
    REQUIRE(a.scalars[r].size() == b.scalars[r].size());
    for (std::size_t j = 0; j < a.scalars[r].size(); ++j) {
      if (std::isnan(a.scalars[r][j])) {
        CHECK(std::isnan(b.scalars[r][j]));
        continue;
      }
      CHECK(a.scalars[r][j] == b.scalars[r][j]);
    }
    for (std::size_t i = 0; i < a.lbe_rows[r].size(); ++i) {
      CHECK(a.lbe_rows[r][i] == b.lbe_rows[r][i]);
      CHECK(a.lfe_rows[r][i] == b.lfe_rows[r][i]);
    }
  }
}

TEST_CASE("significance shares from row intervals") {
  EffectsTable t;
  for (int i = 0; i < 10; ++i) {
    EffectsRow r;
    r.lbe = 0.15;
    r.lfe = 0.05;
    r.exporter = i < 4;
    t.rows.push_back(r);
  }
  RowIntervals iv;
  iv.lbe_lo.assign(10, 0.1);
  iv.lbe_hi.assign(10, 0.2);
  iv.lfe_lo.assign(10, -0.1);
  iv.lfe_hi.assign(10, 0.2);
  const SignificanceShares s = significance_share(t, iv);
  for (int g = 0; g < 3; ++g) {
    CHECK(s.lbe[g] == doctest::Approx(1.0));
    CHECK(s.lfe[g] == doctest::Approx(0.0));
  }
}

TEST_CASE("jackknife over firm groups feeds per-estimand acceleration") {
  DgpConfig cfg;
  cfg.n_firms = 90;
  cfg.n_periods = 5;
  cfg.seed = 13;
  const Fitted f = fitted_sim(cfg);

  const JackknifeSet jk = jackknife_pipeline(f.sample, f.fit, 20, {}, 2);
  CHECK(jk.n_groups == 5);  // ceil(90/20)
  CHECK(jk.scalars.size() == 5);
  // alpha_k estimates vary across deletions; acceleration is finite
  std::vector<double> ak;
  for (const auto& row : jk.scalars) ak.push_back(row[3]);
  const Acceleration a = jackknife_acceleration(ak);
  CHECK(std::isfinite(a.c));

  SUBCASE("too few groups throws") {
    CHECK_THROWS_AS(jackknife_pipeline(f.sample, f.fit, 50, {}, 1), ValidationError);
  }
}

TEST_CASE("bootstrap intervals cover the truth on one seeded fixture") {
  DgpConfig cfg;
  cfg.n_firms = 300;
  cfg.n_periods = 8;
  cfg.seed = 18;
  cfg.sigma_zeta = 0.06;
  cfg.group_shift_t_sd = 0.25;
  cfg.x_noise_sd = 0.20;
  cfg.x_const = -0.10;
  const Fitted f = fitted_sim(cfg);
  const BootstrapSet bs = wild_bootstrap(f.sample, f.fit, 60, 2024, {}, 2);
  const EstimandSet point = compute_estimands(f.sample, f.fit);
  const IntervalSet iv = make_intervals(point, bs);
  const auto at = [&](const std::string& name) {
    for (std::size_t j = 0; j < iv.names.size(); ++j)
      if (iv.names[j] == name) return iv.intervals[j];
    throw std::runtime_error("missing estimand " + name);
  };
  const IntervalEstimate ak = at("alpha_k");
  CHECK(ak.lo <= cfg.alpha_k);
  CHECK(ak.hi >= cfg.alpha_k);
  CHECK(ak.lo < ak.hi);
}
