#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace exprod {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty range");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double stdev(std::span<const double> x) { return std::sqrt(variance(x)); }

// Percentile with linear interpolation between order statistics
// (h = p*(n-1), the convention stated in the docs; BCa endpoints use this).
inline double percentile_linear(std::vector<double> sorted_or_not, double p) {
  if (sorted_or_not.empty()) throw std::invalid_argument("percentile of empty range");
  std::sort(sorted_or_not.begin(), sorted_or_not.end());
  const auto& z = sorted_or_not;
  if (p <= 0.0) return z.front();
  if (p >= 1.0) return z.back();
  const double h = p * static_cast<double>(z.size() - 1);
  const auto i = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(i);
  if (i + 1 >= z.size()) return z.back();
  return z[i] + frac * (z[i + 1] - z[i]);
}

// Lower empirical quantile Q(tau) = x_(ceil(n*tau)); this is a minimizer of
// the check-function sum, which is what the closed-form quantile premia need.
inline double quantile_lower(std::vector<double> x, double tau) {
  if (x.empty()) throw std::invalid_argument("quantile of empty range");
  if (tau <= 0.0 || tau >= 1.0) throw std::invalid_argument("tau must be in (0,1)");
  std::sort(x.begin(), x.end());
  const double nt = tau * static_cast<double>(x.size());
  auto k = static_cast<std::size_t>(std::ceil(nt));
  if (k < 1) k = 1;
  if (k > x.size()) k = x.size();
  return x[k - 1];
}

// Standard normal cdf
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488016887242097); }

// Standard normal quantile, Wichura's AS 241 (double precision)
inline double norm_ppf(double p) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("norm_ppf needs p in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r + 6.7265770927008700853e4) * r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r + 3.9307895800092710610e4) * r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return (q < 0.0) ? -val : val;
}

}  // namespace exprod
