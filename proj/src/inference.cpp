#include "exprod/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include "exprod/errors.hpp"
#include "exprod/parallel.hpp"
#include "exprod/rng.hpp"
#include "exprod/stats.hpp"

namespace exprod {

namespace {

// Evaluates row-level effects on the base sample at replicate/deletion
// parameters; the proxy W is rebuilt from the replicate's stage-1 constants.
void eval_row_effects(const EstimationSample& base, const PointFit& fit, std::vector<double>& lbe,
                      std::vector<double>& lfe) {
  const auto n = base.aligned.size();
  lbe.resize(n);
  lfe.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = base.aligned[i];
    const double m_star = std::log(a.rel_price_lag) - fit.s1.ln_alpham_theta -
                          (fit.s1.alpha_m - 1.0) * a.m_lag;
    const double w = m_star - fit.s2.alpha_k * a.k_lag - fit.s2.alpha_l * a.l_lag;
    const EffectPoint e = effects_at(fit.s2, w, a.x_lag, a.xbar_lag);
    lbe[i] = e.lbe;
    lfe[i] = e.lfe;
  }
}

}  // namespace

std::vector<double> wild_weights(std::uint64_t seed, int b, int n_firms) {
  Rng rng(seed, static_cast<std::uint64_t>(b) + 1);
  std::vector<double> w(n_firms);
  for (int i = 0; i < n_firms; ++i) w[i] = rng.rademacher();
  return w;
}

EstimationSample regenerate_outcomes(const EstimationSample& sample, const PointFit& fit,
                                     std::span<const double> firm_weights) {
  if (firm_weights.size() != static_cast<std::size_t>(sample.n_firms))
    throw ValidationError("regenerate_outcomes: need one weight per firm");
  EstimationSample rep = sample;
  const double ln_at = fit.s1.ln_alpham_theta;
  for (std::size_t i = 0; i < rep.all_rows.size(); ++i)
    rep.all_rows[i].ln_share = ln_at - firm_weights[rep.all_rows[i].firm_index] * fit.s1.eta[i];
  for (std::size_t i = 0; i < rep.aligned.size(); ++i) {
    auto& a = rep.aligned[i];
    const double wi = firm_weights[a.firm_index];
    a.y = fit.s2.alpha_k * a.k + fit.s2.alpha_l * a.l + fit.s1.alpha_m * a.m + fit.s2.g_hat[i] +
          wi * fit.s2.zeta[i] + wi * fit.ts.eta_cur[i];
  }
  return rep;
}

BootstrapSet wild_bootstrap(const EstimationSample& sample, const PointFit& fit, int B,
                            std::uint64_t seed, const Stage2Options& opt, int threads) {
  if (B < 1) throw ValidationError("bootstrap: B must be >= 1");

  BootstrapSet bs;
  bs.seed = seed;
  bs.B = B;
  bs.names = compute_estimands(sample, fit).names;

  // per-replicate slots; reduced in replicate order afterwards
  std::vector<std::vector<double>> scalars(B), lbe_rows(B), lfe_rows(B);
  std::vector<char> ok(B, 0);

  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
    const std::vector<double> w = wild_weights(seed, static_cast<int>(b), sample.n_firms);
    const EstimationSample rep = regenerate_outcomes(sample, fit, w);
    try {
      const PointFit rep_fit = run_pipeline(rep, opt);
      scalars[b] = compute_estimands(rep, rep_fit).values;
      eval_row_effects(sample, rep_fit, lbe_rows[b], lfe_rows[b]);
      ok[b] = 1;
    } catch (const ConvergenceError&) {
      ok[b] = 0;  // dropped, not retried: retrying would break determinism
    }
  });

  for (int b = 0; b < B; ++b) {
    if (!ok[b]) {
      ++bs.failures;
      continue;
    }
    bs.scalars.push_back(std::move(scalars[b]));
    bs.lbe_rows.push_back(std::move(lbe_rows[b]));
    bs.lfe_rows.push_back(std::move(lfe_rows[b]));
    bs.replicate_ids.push_back(b);
  }
  if (bs.failures > 0.05 * B)
    throw ConvergenceError("bootstrap: " + std::to_string(bs.failures) + " of " +
                           std::to_string(B) + " replicates failed to converge (cap is 5%)");
  return bs;
}

void write_bootstrap_csv(const BootstrapSet& bs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write CSV file: " + path);
  out.precision(17);
  out << "replicate";
  for (const auto& n : bs.names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < bs.scalars.size(); ++r) {
    out << bs.replicate_ids[r];
    for (double v : bs.scalars[r]) out << ',' << v;
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

JackknifeSet jackknife_pipeline(const EstimationSample& sample, const PointFit& fit,
                                int delete_size, const Stage2Options& opt, int threads) {
  if (delete_size < 1) throw ValidationError("jackknife: delete size must be >= 1");
  const int n_firms = sample.n_firms;
  const int J = (n_firms + delete_size - 1) / delete_size;
  if (J < 3) throw ValidationError("jackknife: need at least 3 deletion groups");

  JackknifeSet jk;
  jk.delete_size = delete_size;
  jk.n_groups = J;
  jk.names = compute_estimands(sample, fit).names;
  jk.scalars.resize(J);
  jk.lbe_rows.resize(J);
  jk.lfe_rows.resize(J);

  parallel_for(static_cast<std::size_t>(J), threads, [&](std::size_t j) {
    const int lo = static_cast<int>(j) * delete_size;
    const int hi = std::min(lo + delete_size, n_firms);
    const EstimationSample reduced =
        filter_sample(sample, [&](int f) { return f < lo || f >= hi; });
    const PointFit jfit = run_pipeline(reduced, opt);
    const EstimandSet est = compute_estimands(reduced, jfit);
    if (est.names != jk.names)
      throw ValidationError(
          "jackknife: deleting firm group " + std::to_string(j) +
          " changed the estimand set (a fixed-effect level vanished); reduce the delete size");
    jk.scalars[j] = est.values;
    eval_row_effects(sample, jfit, jk.lbe_rows[j], jk.lfe_rows[j]);
  });
  return jk;
}

Acceleration jackknife_acceleration(std::span<const double> z) {
  if (z.size() < 3) throw ValidationError("jackknife acceleration: need at least 3 estimates");
  const double zbar = mean(z);
  double s2 = 0, s3 = 0;
  for (double v : z) {
    const double d = zbar - v;
    s2 += d * d;
    s3 += d * d * d;
  }
  Acceleration a;
  if (s2 <= 0.0) {
    a.degenerate = true;
    return a;
  }
  a.c = s3 / (6.0 * std::pow(s2, 1.5));
  return a;
}

IntervalEstimate bca_interval(double point, std::span<const double> replicates, double c,
                              double level) {
  const auto B = replicates.size();
  if (B < 2) throw ValidationError("bca_interval: need at least 2 replicates");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("bca_interval: level must be in (0,1)");

  IntervalEstimate iv;
  iv.point = point;
  iv.level = level;
  iv.c = c;

  double count = 0;
  for (double r : replicates)
    if (r < point) count += 1.0;
  if (count <= 0.0 || count >= static_cast<double>(B)) {
    count = std::clamp(count, 0.5, static_cast<double>(B) - 0.5);
    iv.clamped = true;
  }
  iv.q0 = norm_ppf(count / static_cast<double>(B));

  // canonical tail ranks; the collapse below must reproduce these bitwise
  const double rank_lo = 0.5 * (1.0 - level);
  const double rank_hi = 1.0 - rank_lo;
  auto adjust = [&](double z, double collapse_rank) {
    // with q0 = 0 and c = 0 the adjustment is the identity and the interval
    // equals the plain percentile interval exactly, so skip the
    // cdf/quantile round trip in that case
    if (iv.q0 == 0.0 && c == 0.0) return collapse_rank;
    const double t = iv.q0 + z;
    const double den = 1.0 - c * t;
    // degenerate acceleration pushes the rank to the nearer edge
    if (den <= 0.0) return t > 0.0 ? 1.0 : 0.0;
    return norm_cdf(iv.q0 + t / den);
  };
  const double a1 = adjust(norm_ppf(rank_lo), rank_lo);
  const double a2 = adjust(norm_ppf(rank_hi), rank_hi);

  std::vector<double> z(replicates.begin(), replicates.end());
  iv.lo = percentile_linear(z, a1);
  iv.hi = percentile_linear(std::move(z), a2);
  return iv;
}

namespace {

std::vector<double> column(const std::vector<std::vector<double>>& m, std::size_t j) {
  std::vector<double> out;
  out.reserve(m.size());
  for (const auto& row : m) out.push_back(row[j]);
  return out;
}

}  // namespace

IntervalSet make_intervals(const EstimandSet& point, const BootstrapSet& bs,
                           const JackknifeSet* jk, double level) {
  if (point.names != bs.names)
    throw ValidationError("make_intervals: estimand sets do not match");
  IntervalSet set;
  set.names = point.names;
  set.intervals.reserve(point.names.size());
  for (std::size_t j = 0; j < point.names.size(); ++j) {
    const std::vector<double> reps = column(bs.scalars, j);
    double c = 0.0;
    if (jk) c = jackknife_acceleration(column(jk->scalars, j)).c;
    set.intervals.push_back(bca_interval(point.values[j], reps, c, level));
  }
  return set;
}

RowIntervals make_row_intervals(const EffectsTable& point_table, const BootstrapSet& bs,
                                const JackknifeSet* jk, double level) {
  const std::size_t n = point_table.rows.size();
  RowIntervals out;
  out.lbe_lo.resize(n);
  out.lbe_hi.resize(n);
  out.lfe_lo.resize(n);
  out.lfe_hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> rb = column(bs.lbe_rows, i);
    const std::vector<double> rf = column(bs.lfe_rows, i);
    double cb = 0.0, cf = 0.0;
    if (jk) {
      cb = jackknife_acceleration(column(jk->lbe_rows, i)).c;
      cf = jackknife_acceleration(column(jk->lfe_rows, i)).c;
    }
    const IntervalEstimate ib = bca_interval(point_table.rows[i].lbe, rb, cb, level);
    const IntervalEstimate fi = bca_interval(point_table.rows[i].lfe, rf, cf, level);
    out.lbe_lo[i] = ib.lo;
    out.lbe_hi[i] = ib.hi;
    out.lfe_lo[i] = fi.lo;
    out.lfe_hi[i] = fi.hi;
  }
  return out;
}

SignificanceShares significance_share(const EffectsTable& table, const RowIntervals& iv) {
  SignificanceShares s;
  std::size_t n[3] = {0, 0, 0};
  std::size_t sig_lbe[3] = {0, 0, 0};
  std::size_t sig_lfe[3] = {0, 0, 0};
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const int g = table.rows[i].exporter ? 1 : 2;
    const bool lbe_sig = iv.lbe_lo[i] > 0.0 || iv.lbe_hi[i] < 0.0;
    const bool lfe_sig = iv.lfe_lo[i] > 0.0 || iv.lfe_hi[i] < 0.0;
    for (int k : {0, g}) {
      ++n[k];
      sig_lbe[k] += lbe_sig;
      sig_lfe[k] += lfe_sig;
    }
  }
  for (int k = 0; k < 3; ++k) {
    s.lbe[k] = n[k] ? static_cast<double>(sig_lbe[k]) / static_cast<double>(n[k]) : 0.0;
    s.lfe[k] = n[k] ? static_cast<double>(sig_lfe[k]) / static_cast<double>(n[k]) : 0.0;
  }
  return s;
}

}  // namespace exprod
