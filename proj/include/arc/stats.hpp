#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "arc/error.hpp"

namespace arc::stats {

inline double mean(const std::vector<double>& v) {
  require(!v.empty(), ErrorCode::kInvalidArgument, "mean of empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  require(v.size() >= 2, ErrorCode::kInvalidArgument, "variance needs at least 2 values");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p_greater = 1.0;    // H1: mean(a) > mean(b)
  double p_two_sided = 1.0;
};

namespace detail {
inline TTest finish(double t, double df) {
  TTest r{t, df, 1.0, 1.0};
  if (std::isinf(t)) {
    r.p_greater = t > 0 ? 0.0 : 1.0;
    r.p_two_sided = 0.0;
    return r;
  }
  if (std::isnan(t)) return r;
  boost::math::students_t dist(df);
  r.p_greater = boost::math::cdf(boost::math::complement(dist, t));
  r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return r;
}
}  // namespace detail

/// Paired t-test on a[i] - b[i].
inline TTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && a.size() >= 2, ErrorCode::kInvalidArgument, "paired test needs equal sizes >= 2");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double m = mean(d), var = variance(d);
  const double se = std::sqrt(var / static_cast<double>(d.size()));
  const double t = se > 0.0 ? m / se : (m > 0 ? INFINITY : (m < 0 ? -INFINITY : NAN));
  return detail::finish(t, static_cast<double>(d.size() - 1));
}

/// Welch's unequal-variance t-test.
inline TTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  const double va = variance(a) / static_cast<double>(a.size());
  const double vb = variance(b) / static_cast<double>(b.size());
  const double se = std::sqrt(va + vb);
  const double diff = mean(a) - mean(b);
  const double t = se > 0.0 ? diff / se : (diff > 0 ? INFINITY : (diff < 0 ? -INFINITY : NAN));
  const double df = se > 0.0 ? (va + vb) * (va + vb) /
                                   (va * va / static_cast<double>(a.size() - 1) +
                                    vb * vb / static_cast<double>(b.size() - 1))
                             : static_cast<double>(a.size() + b.size() - 2);
  return detail::finish(t, df);
}

}  // namespace arc::stats
