#include "exprod/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "exprod/errors.hpp"
#include "exprod/parallel.hpp"

namespace exprod {

namespace {

void fill_basis(Eigen::MatrixXd& A, const EstimationSample& sample, const TransformedSample& ts,
                const BasisSpec& spec, double ak, double al) {
  const auto n = sample.aligned.size();
  if (spec.markov_only) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = sample.aligned[i];
      const double w = ts.m_star_lag[i] - ak * a.k_lag - al * a.l_lag;
      A(i, 0) = 1.0;
      A(i, 1) = w;
      A(i, 2) = w * w;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = sample.aligned[i];
    const double w = ts.m_star_lag[i] - ak * a.k_lag - al * a.l_lag;
    const double x = a.x_lag;
    const double xb = a.xbar_lag;
    A(i, 0) = 1.0;
    A(i, 1) = w;
    A(i, 2) = w * w;
    A(i, 3) = x;
    A(i, 4) = x * x;
    A(i, 5) = xb;
    A(i, 6) = xb * xb;
    A(i, 7) = w * x;
    A(i, 8) = w * xb;
    A(i, 9) = x * xb;
  }
  int col = kSieveDim;
  if (spec.fe_region) {
    for (std::size_t lv = 1; lv < spec.region_levels.size(); ++lv, ++col)
      for (std::size_t i = 0; i < n; ++i)
        A(i, col) = sample.aligned[i].region == spec.region_levels[lv] ? 1.0 : 0.0;
  }
  if (spec.fe_industry) {
    for (std::size_t lv = 1; lv < spec.industry_levels.size(); ++lv, ++col)
      for (std::size_t i = 0; i < n; ++i)
        A(i, col) = sample.aligned[i].industry == spec.industry_levels[lv] ? 1.0 : 0.0;
  }
}

struct NmResult {
  double a = 0, b = 0, f = 0;
  int evals = 0;
  bool converged = false;
};

// Nelder-Mead on 2 parameters; stops when the simplex diameter and the
// relative objective spread both fall below their tolerances. On exact-fit
// problems the spread bottoms out at the sse's own rounding noise, so the
// spread test carries a floor tied to the initial objective scale, and a
// hard diameter floor ends noise-dominated searches.
template <typename F>
NmResult nelder_mead2(F&& f, double a0, double b0, double step, double rel_tol, double diam_tol,
                      int max_evals) {
  double vx[3] = {a0, a0 + step, a0};
  double vy[3] = {b0, b0, b0 + step};
  double fv[3];
  int evals = 0;
  auto eval = [&](double x, double y) {
    ++evals;
    const double v = f(x, y);
    return std::isfinite(v) ? v : 1e300;
  };
  for (int i = 0; i < 3; ++i) fv[i] = eval(vx[i], vy[i]);
  const double noise_floor = 1e-14 * std::max({fv[0], fv[1], fv[2], 1e-30});

  NmResult out;
  while (evals < max_evals) {
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int i, int j) { return fv[i] < fv[j]; });
    const int lo = order[0], mid = order[1], hi = order[2];

    const double diam = std::max({std::hypot(vx[0] - vx[1], vy[0] - vy[1]),
                                  std::hypot(vx[0] - vx[2], vy[0] - vy[2]),
                                  std::hypot(vx[1] - vx[2], vy[1] - vy[2])});
    const double spread = fv[hi] - fv[lo];
    if (diam <= diam_tol &&
        (spread <= rel_tol * std::fabs(fv[lo]) + noise_floor || diam <= 1e-12)) {
      out.converged = true;
      break;
    }

    const double cx = 0.5 * (vx[lo] + vx[mid]);
    const double cy = 0.5 * (vy[lo] + vy[mid]);
    const double rx = cx + (cx - vx[hi]);
    const double ry = cy + (cy - vy[hi]);
    const double fr = eval(rx, ry);
    if (fr < fv[lo]) {
      const double ex = cx + 2.0 * (cx - vx[hi]);
      const double ey = cy + 2.0 * (cy - vy[hi]);
      const double fe = eval(ex, ey);
      if (fe < fr) {
        vx[hi] = ex;
        vy[hi] = ey;
        fv[hi] = fe;
      } else {
        vx[hi] = rx;
        vy[hi] = ry;
        fv[hi] = fr;
      }
    } else if (fr < fv[mid]) {
      vx[hi] = rx;
      vy[hi] = ry;
      fv[hi] = fr;
    } else {
      const bool outside = fr < fv[hi];
      const double px = outside ? cx + 0.5 * (rx - cx) : cx + 0.5 * (vx[hi] - cx);
      const double py = outside ? cy + 0.5 * (ry - cy) : cy + 0.5 * (vy[hi] - cy);
      const double fp = eval(px, py);
      if (fp < (outside ? fr : fv[hi])) {
        vx[hi] = px;
        vy[hi] = py;
        fv[hi] = fp;
      } else {
        for (int i = 0; i < 3; ++i) {
          if (i == lo) continue;
          vx[i] = vx[lo] + 0.5 * (vx[i] - vx[lo]);
          vy[i] = vy[lo] + 0.5 * (vy[i] - vy[lo]);
          fv[i] = eval(vx[i], vy[i]);
        }
      }
    }
  }
  const int best = std::min_element(fv, fv + 3) - fv;
  out.a = vx[best];
  out.b = vy[best];
  out.f = fv[best];
  out.evals = evals;
  return out;
}

constexpr double kBoundaryTol = 1e-3;

}  // namespace

InnerSolve solve_projected(const Eigen::MatrixXd& basis, const Eigen::VectorXd& target,
                           double pivot_rel_tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(pivot_rel_tol);
  qr.compute(basis);
  const auto rank = qr.rank();
  if (rank < 3) throw ConvergenceError("inner solve: basis rank collapsed below 3 effective columns");

  InnerSolve s;
  s.gamma = qr.solve(target);  // zero coefficients on pivoted-out columns
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = rank; j < basis.cols(); ++j) {
    s.dropped.push_back(static_cast<int>(perm[j]));
    s.gamma[perm[j]] = 0.0;  // solve() already zeroes these; make it explicit
  }
  std::sort(s.dropped.begin(), s.dropped.end());
  const Eigen::VectorXd resid = target - basis * s.gamma;
  s.sse = resid.squaredNorm();
  return s;
}

BasisSpec make_basis_spec(const EstimationSample& sample, const Stage2Options& opt) {
  BasisSpec spec;
  if (opt.markov_only) {
    spec.markov_only = true;
    spec.names = {"const", "w", "w2"};
    return spec;
  }
  spec.fe_region = opt.fe_region;
  spec.fe_industry = opt.fe_industry;
  spec.names = {"const", "w", "w2", "x", "x2", "xbar", "xbar2", "w_x", "w_xbar", "x_xbar"};
  if (opt.fe_region) {
    std::set<std::string> lv;
    for (const auto& a : sample.aligned) lv.insert(a.region);
    spec.region_levels.assign(lv.begin(), lv.end());
    for (std::size_t i = 1; i < spec.region_levels.size(); ++i)
      spec.names.push_back("fe_region:" + spec.region_levels[i]);
  }
  if (opt.fe_industry) {
    std::set<std::string> lv;
    for (const auto& a : sample.aligned) lv.insert(a.industry);
    spec.industry_levels.assign(lv.begin(), lv.end());
    for (std::size_t i = 1; i < spec.industry_levels.size(); ++i)
      spec.names.push_back("fe_industry:" + spec.industry_levels[i]);
  }
  return spec;
}

Eigen::MatrixXd build_basis(const EstimationSample& sample, const TransformedSample& ts,
                            const BasisSpec& spec, double alpha_k, double alpha_l) {
  Eigen::MatrixXd A(sample.aligned.size(), spec.dim());
  fill_basis(A, sample, ts, spec, alpha_k, alpha_l);
  return A;
}

std::pair<InnerSolve, Eigen::VectorXd> concentrated_sse(double alpha_k, double alpha_l,
                                                        const EstimationSample& sample,
                                                        const TransformedSample& ts,
                                                        const BasisSpec& spec,
                                                        double pivot_rel_tol) {
  const Eigen::MatrixXd A = build_basis(sample, ts, spec, alpha_k, alpha_l);
  Eigen::VectorXd target(sample.aligned.size());
  for (std::size_t i = 0; i < sample.aligned.size(); ++i) {
    const auto& a = sample.aligned[i];
    target[i] = ts.y_star[i] - alpha_k * a.k - alpha_l * a.l;
  }
  InnerSolve s = solve_projected(A, target, pivot_rel_tol);
  Eigen::VectorXd resid = target - A * s.gamma;
  return {std::move(s), std::move(resid)};
}

Stage2Result fit_stage2(const EstimationSample& sample, const TransformedSample& ts,
                        const Stage1Result& s1, const Stage2Options& opt) {
  const BasisSpec spec = make_basis_spec(sample, opt);
  const auto n = sample.aligned.size();
  if (n < static_cast<std::size_t>(spec.dim()) + 2)
    throw ValidationError("stage2: sample too small for the sieve dimension");

  // grid of starts over (0,1)^2; center last so 8 starts cover the frame
  static const double grid[9][2] = {{0.2, 0.2}, {0.2, 0.5}, {0.2, 0.8}, {0.5, 0.2}, {0.5, 0.8},
                                    {0.8, 0.2}, {0.8, 0.5}, {0.8, 0.8}, {0.5, 0.5}};
  const int n_starts = std::clamp(opt.n_starts, 1, 9);

  std::vector<StartReport> reports(n_starts);
  parallel_for(static_cast<std::size_t>(n_starts), opt.threads, [&](std::size_t si) {
    Eigen::MatrixXd A(n, spec.dim());
    Eigen::VectorXd target(n);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(opt.pivot_rel_tol);

    auto objective = [&](double ak, double al) {
      fill_basis(A, sample, ts, spec, ak, al);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = sample.aligned[i];
        target[i] = ts.y_star[i] - ak * a.k - al * a.l;
      }
      qr.compute(A);
      if (qr.rank() < 3) return 1e300;
      const Eigen::VectorXd gamma = qr.solve(target);
      return (target - A * gamma).squaredNorm();
    };

    const NmResult r = nelder_mead2(objective, grid[si][0], grid[si][1], 0.1, opt.rel_sse_tol,
                                    opt.simplex_tol, opt.max_evals_per_start);
    StartReport& rep = reports[si];
    rep.alpha_k = r.a;
    rep.alpha_l = r.b;
    rep.sse = r.f;
    rep.evals = r.evals;
    rep.converged = r.converged;
    rep.boundary = std::fabs(r.a) < kBoundaryTol || std::fabs(r.b) < kBoundaryTol;
    rep.box_exit = r.a <= 0.0 || r.a >= 1.0 || r.b <= 0.0 || r.b >= 1.0;
  });

  int chosen = -1;
  for (int i = 0; i < n_starts; ++i) {
    if (!reports[i].converged) continue;
    if (chosen < 0 || reports[i].sse < reports[chosen].sse) chosen = i;
  }
  if (chosen < 0) throw ConvergenceError("stage2: no multistart replica converged");
  {
    bool all_boundary = true;
    for (int i = 0; i < n_starts; ++i)
      if (reports[i].converged && !reports[i].boundary) all_boundary = false;
    if (all_boundary) throw ConvergenceError("stage2: all converged starts are boundary solutions");
  }

  Stage2Result res;
  res.alpha_k = reports[chosen].alpha_k;
  res.alpha_l = reports[chosen].alpha_l;
  res.fe_region = opt.fe_region;
  res.fe_industry = opt.fe_industry;
  res.region_levels = spec.region_levels;
  res.industry_levels = spec.industry_levels;
  res.basis_names = spec.names;
  res.convergence.starts = reports;
  res.convergence.chosen_start = chosen;
  for (const auto& r : reports) res.convergence.total_evals += r.evals;

  auto [inner, resid] = concentrated_sse(res.alpha_k, res.alpha_l, sample, ts, spec, opt.pivot_rel_tol);
  res.gamma = inner.gamma;
  res.convergence.dropped_columns = inner.dropped;
  res.sse = inner.sse;

  const Eigen::MatrixXd A = build_basis(sample, ts, spec, res.alpha_k, res.alpha_l);
  res.w_hat.resize(n);
  res.g_hat.resize(n);
  res.resid.resize(n);
  res.zeta.resize(n);
  res.omega_plus_const.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = sample.aligned[i];
    res.w_hat[i] = ts.m_star_lag[i] - res.alpha_k * a.k_lag - res.alpha_l * a.l_lag;
    res.g_hat[i] = A.row(i).dot(res.gamma);
    res.resid[i] = resid[i];
    res.zeta[i] = resid[i] - ts.eta_cur[i];
    res.omega_plus_const[i] =
        a.y - res.alpha_k * a.k - res.alpha_l * a.l - s1.alpha_m * a.m - ts.eta_cur[i];
  }
  res.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) res.sse += res.resid[i] * res.resid[i];
  return res;
}

}  // namespace exprod
