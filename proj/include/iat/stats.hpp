#pragma once

// Descriptive statistics and the paired t-test.

#include <iat/errors.hpp>

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace iat::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw InsufficientDataError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_sd(std::span<const double> x) {
  if (x.size() < 2) throw InsufficientDataError("sd needs at least 2 values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Quantile of already-sorted data, linear interpolation between order
/// statistics (h = (n - 1) p).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InsufficientDataError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct FiveNumber {
  double min, q1, median, q3, max;
};

inline FiveNumber five_number_summary(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return {quantile_sorted(s, 0.0), quantile_sorted(s, 0.25),
          quantile_sorted(s, 0.5), quantile_sorted(s, 0.75),
          quantile_sorted(s, 1.0)};
}

/// Moment skewness g1 = m3 / m2^(3/2); zero for a constant sample.
inline double skewness(std::span<const double> x) {
  const double m = mean(x);
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const auto n = static_cast<double>(x.size());
  m2 /= n;
  m3 /= n;
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

/// Pearson correlation; 0 when either column has zero variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("pearson: length mismatch");
  if (a.size() < 2) throw InsufficientDataError("pearson needs at least 2 rows");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct TTestResult {
  double t;
  double df;
  double p_two_tailed;
  double mean_difference;
};

/// Paired two-tailed t-test on (b - a).
inline TTestResult paired_t_test(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("paired t-test: length mismatch");
  if (a.size() < 2) throw InsufficientDataError("paired t-test needs 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
  const double md = mean(d);
  const double sd = sample_sd(d);
  const double df = static_cast<double>(d.size() - 1);
  if (sd == 0.0) {
    if (md == 0.0) return {0.0, df, 1.0, 0.0};
    return {std::copysign(std::numeric_limits<double>::infinity(), md), df, 0.0,
            md};
  }
  const double t = md / (sd / std::sqrt(static_cast<double>(d.size())));
  // P(|T| > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  const double p = boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
  return {t, df, p, md};
}

}  // namespace iat::stats
