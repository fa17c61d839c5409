#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "waf/dataset.hpp"

namespace waf {

constexpr int kDefaultBins = 16;

// Plug-in mutual information (nats) between a binary ±1 attribute column
// and a continuous error column discretized into `n_bins` equal-frequency
// bins over the pooled values. Bin edges sit at the order statistics
// sorted[(j*N)/B]; a value tied with an edge falls in the lower bin.
inline double mutual_information(const Vector& attribute, const Vector& errors,
                                 int n_bins = kDefaultBins) {
  if (attribute.size() != errors.size())
    throw AuditError("attribute and error columns differ in length");
  if (n_bins < 2) throw AuditError("need at least 2 bins");
  const Eigen::Index n = errors.size();
  if (n < 2 * static_cast<Eigen::Index>(n_bins))
    throw AuditError("need at least 2*bins samples, got " + std::to_string(n));

  Eigen::Index n_priv = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (attribute(i) > 0) ++n_priv;
  if (n_priv == 0 || n_priv == n)
    throw AuditError("attribute column has a single group; dependence undefined");

  std::vector<double> sorted(errors.data(), errors.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(n_bins) - 1);
  for (Eigen::Index j = 1; j < n_bins; ++j)
    edges.push_back(sorted[static_cast<std::size_t>((j * n) / n_bins)]);

  Matrix joint = Matrix::Zero(n_bins, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto bin = std::lower_bound(edges.begin(), edges.end(), errors(i)) -
                     edges.begin();
    joint(static_cast<Eigen::Index>(bin), attribute(i) > 0 ? 0 : 1) += 1.0;
  }
  joint /= static_cast<double>(n);

  const Vector p_bin = joint.rowwise().sum();
  const Eigen::RowVector2d p_group = joint.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index b = 0; b < n_bins; ++b)
    for (Eigen::Index g = 0; g < 2; ++g)
      if (joint(b, g) > 0.0)
        mi += joint(b, g) * std::log(joint(b, g) / (p_bin(b) * p_group(g)));
  return mi;
}

}  // namespace waf
