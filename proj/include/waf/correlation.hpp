#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "waf/dataset.hpp"

namespace waf {

struct Correlation {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

namespace detail {

// Two-sided p-value for a sample correlation under the exact null
// distribution: t = r * sqrt((n-2) / (1-r^2)) with n-2 degrees of freedom.
inline double correlation_p_value(double r, std::size_t n) {
  const double df = static_cast<double>(n) - 2.0;
  const double denom = 1.0 - r * r;
  if (denom <= 0.0) return 0.0;
  const double t = std::abs(r) * std::sqrt(df / denom);
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace detail

inline Correlation pearson(const Vector& xs, const Vector& ys) {
  if (xs.size() != ys.size()) throw AuditError("correlation inputs differ in length");
  const Eigen::Index n = xs.size();
  if (n < 3) throw AuditError("correlation needs at least 3 points");
  const Vector xc = xs.array() - xs.mean();
  const Vector yc = ys.array() - ys.mean();
  const double sx = xc.norm();
  const double sy = yc.norm();
  if (sx == 0.0 || sy == 0.0)
    throw AuditError("correlation undefined: an input has zero variance");
  Correlation out;
  out.n = static_cast<std::size_t>(n);
  out.r = std::clamp(xc.dot(yc) / (sx * sy), -1.0, 1.0);
  out.p = detail::correlation_p_value(out.r, out.n);
  return out;
}

// Mid-ranks (1-based; ties share the average of their rank range).
inline Vector mid_ranks(const Vector& values) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values(a) < values(b);
  });
  Vector ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && values(order[static_cast<std::size_t>(j + 1)]) ==
                            values(order[static_cast<std::size_t>(i)]))
      ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index t = i; t <= j; ++t)
      ranks(order[static_cast<std::size_t>(t)]) = shared;
    i = j + 1;
  }
  return ranks;
}

// Spearman's rho: Pearson correlation of mid-ranks, p-value via the same
// t-approximation.
inline Correlation spearman(const Vector& xs, const Vector& ys) {
  if (xs.size() != ys.size()) throw AuditError("correlation inputs differ in length");
  if (xs.size() < 3) throw AuditError("correlation needs at least 3 points");
  return pearson(mid_ranks(xs), mid_ranks(ys));
}

}  // namespace waf
