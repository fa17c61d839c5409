#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "waf/dataset.hpp"

namespace waf {

constexpr double kDefaultEpsilon = 1e-7;

// Per-class allocative error of one prediction against its one-hot truth:
//   e_c = -( y_c ln p_c + (1 - y_c) ln(1 - p_c) )
// with probabilities clamped into [eps, 1-eps] so the error stays finite.
inline Vector allocative_error(const Vector& one_hot_truth, const Vector& probs,
                               double eps = kDefaultEpsilon) {
  if (probs.size() != one_hot_truth.size())
    throw AuditError("probability and truth vectors differ in length");
  if (!(eps > 0.0 && eps < 0.5))
    throw AuditError("epsilon must lie in (0, 0.5)");
  Vector e(probs.size());
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    const double p = std::min(std::max(probs(c), eps), 1.0 - eps);
    const double y = one_hot_truth(c);
    e(c) = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return e;
}

// N×C matrix of per-class errors across an audit set.
inline Matrix error_matrix(const AuditSet& set, double eps = kDefaultEpsilon) {
  const Eigen::Index n = static_cast<Eigen::Index>(set.size());
  const Eigen::Index c = static_cast<Eigen::Index>(set.schema.n_classes());
  Matrix e(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = set.records[static_cast<std::size_t>(i)];
    e.row(i) =
        allocative_error(one_hot(r.true_label, set.schema), r.probs, eps)
            .transpose();
  }
  return e;
}

// CSV dump: header "id,e_<class>,..." then one row per record.
inline void save_error_matrix(const AuditSet& set, const Matrix& errors,
                              std::ostream& out) {
  out << "id";
  for (const auto& cls : set.schema.classes) out << ",e_" << cls;
  out << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    out << set.records[static_cast<std::size_t>(i)].id;
    for (Eigen::Index c = 0; c < errors.cols(); ++c) out << "," << errors(i, c);
    out << "\n";
  }
}

inline void save_error_matrix(const AuditSet& set, const Matrix& errors,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw AuditError("cannot write error matrix '" + path + "'");
  save_error_matrix(set, errors, out);
}

}  // namespace waf
