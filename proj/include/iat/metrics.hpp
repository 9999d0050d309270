#pragma once

#include <iat/errors.hpp>

#include <cstddef>

namespace iat {

/// 2x2 confusion counts; rows are the true label, "second" is positive.
struct Confusion {
  std::size_t tn = 0;  // first predicted first
  std::size_t fp = 0;  // first predicted second
  std::size_t fn = 0;  // second predicted first
  std::size_t tp = 0;  // second predicted second

  std::size_t total() const { return tn + fp + fn + tp; }

  void add(bool truth_second, bool predicted_second) {
    if (truth_second)
      (predicted_second ? tp : fn) += 1;
    else
      (predicted_second ? fp : tn) += 1;
  }

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double weighted_f1 = 0.0;
  double f1_first = 0.0;
  double f1_second = 0.0;
};

namespace detail {

inline double ratio_or_zero(double num, double den) {
  return den > 0.0 ? num / den : 0.0;
}

inline double f1(double tp, double fp, double fn) {
  return ratio_or_zero(2.0 * tp, 2.0 * tp + fp + fn);
}

}  // namespace detail

/// Standard metrics with precision/recall for class "second" and F1 weighted by
/// true class size. Undefined ratios count as 0.
inline Metrics metrics(const Confusion& c) {
  const auto n = static_cast<double>(c.total());
  if (n == 0.0) throw DataError("metrics of an empty confusion matrix");
  const double tn = static_cast<double>(c.tn), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tp = static_cast<double>(c.tp);
  Metrics m;
  m.accuracy = (tp + tn) / n;
  m.precision = detail::ratio_or_zero(tp, tp + fp);
  m.recall = detail::ratio_or_zero(tp, tp + fn);
  m.f1_second = detail::f1(tp, fp, fn);
  m.f1_first = detail::f1(tn, fn, fp);
  m.weighted_f1 = ((tn + fp) / n) * m.f1_first + ((tp + fn) / n) * m.f1_second;
  return m;
}

}  // namespace iat
