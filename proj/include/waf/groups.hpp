#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "waf/dataset.hpp"
#include "waf/linear_model.hpp"

namespace waf {

// One joint demographic group: every sample sharing the same full ±1
// attribute pattern. Labels spell the pattern with '1' for privileged,
// '0' for unprivileged, most significant attribute first ("1111" = all
// privileged).
struct GroupRow {
  std::string label;
  Vector signs;  // d-vector of ±1
  std::size_t count = 0;
  Vector empirical;      // per-class mean loss (zeros when count == 0)
  Vector estimate;       // model-implied per-class loss
  Vector abs_deviation;  // |estimate - empirical| per class
  double distance = 0.0; // |total estimated loss - total empirical loss|
};

struct GroupReport {
  std::vector<GroupRow> rows;  // sorted ascending by label
};

// All 2^d sign patterns, most significant attribute first, +1 before -1:
// the first pattern is all-privileged, the last all-unprivileged.
inline std::vector<Vector> enumerate_joint_groups(const AttributeSchema& schema) {
  const std::size_t d = schema.n_attributes();
  if (d > 16)
    throw AuditError("joint-group enumeration capped at 16 attributes, got " +
                     std::to_string(d));
  std::vector<Vector> groups;
  groups.reserve(std::size_t{1} << d);
  for (std::size_t pattern = 0; pattern < (std::size_t{1} << d); ++pattern) {
    Vector g(static_cast<Eigen::Index>(d));
    for (std::size_t a = 0; a < d; ++a) {
      const bool unprivileged = (pattern >> (d - 1 - a)) & 1U;
      g(static_cast<Eigen::Index>(a)) = unprivileged ? -1.0 : 1.0;
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

inline std::string group_label(const Vector& signs) {
  std::string label(static_cast<std::size_t>(signs.size()), '0');
  for (Eigen::Index a = 0; a < signs.size(); ++a)
    if (signs(a) > 0) label[static_cast<std::size_t>(a)] = '1';
  return label;
}

namespace detail {

inline bool in_group(const AuditSet& set, std::size_t row, const Vector& signs) {
  for (Eigen::Index a = 0; a < signs.size(); ++a)
    if (set.demographic_matrix(static_cast<Eigen::Index>(row), a) * signs(a) < 0)
      return false;
  return true;
}

}  // namespace detail

// Per-class mean error over the samples whose demographic pattern equals g.
inline Vector group_mean_loss(const AuditSet& set, const Matrix& errors,
                              const Vector& g) {
  if (errors.rows() != static_cast<Eigen::Index>(set.size()))
    throw AuditError("error matrix row count does not match the audit set");
  Vector sum = Vector::Zero(errors.cols());
  std::size_t count = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!detail::in_group(set, i, g)) continue;
    sum += errors.row(static_cast<Eigen::Index>(i)).transpose();
    ++count;
  }
  if (count == 0)
    throw AuditError("joint group " + group_label(g) + " has no samples");
  return sum / static_cast<double>(count);
}

// Model-implied per-class loss for a joint group: intercept plus the
// demographic coefficients contracted with the sign pattern. Selected
// embedding columns are mean-centered in the design, so they contribute
// nothing at the group level.
inline Vector waf_estimate_group_loss(const WafModel& model, const Vector& g) {
  if (g.size() != static_cast<Eigen::Index>(model.n_attributes))
    throw AuditError("group pattern length does not match the model");
  return model.intercepts +
         model.coefficients.leftCols(g.size()) * g;
}

// Group-level comparison of model-implied and empirical losses. The
// headline distance compares class-summed (total) losses; the per-class
// absolute deviations are kept alongside for class-level inspection.
// Empty groups appear with count 0 and hold no empirical side.
inline GroupReport group_distance_report(const AuditSet& set,
                                         const Matrix& errors,
                                         const WafModel& model) {
  GroupReport report;
  const Eigen::Index n_classes = errors.cols();
  for (const Vector& g : enumerate_joint_groups(set.schema)) {
    GroupRow row;
    row.label = group_label(g);
    row.signs = g;
    row.estimate = waf_estimate_group_loss(model, g);
    for (std::size_t i = 0; i < set.size(); ++i)
      if (detail::in_group(set, i, g)) ++row.count;
    if (row.count > 0) {
      row.empirical = group_mean_loss(set, errors, g);
      row.abs_deviation = (row.estimate - row.empirical).cwiseAbs();
      row.distance = std::abs(row.estimate.sum() - row.empirical.sum());
    } else {
      row.empirical = Vector::Zero(n_classes);
      row.abs_deviation = Vector::Zero(n_classes);
      row.distance = 0.0;
    }
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const GroupRow& a, const GroupRow& b) { return a.label < b.label; });
  return report;
}

}  // namespace waf
