#pragma once

#include <Eigen/Dense>
#include <string>

#include "waf/dataset.hpp"

namespace waf {

// First index attaining the maximum probability.
inline Eigen::Index argmax_class(const Vector& probs) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < probs.size(); ++c)
    if (probs(c) > probs(best)) best = c;
  return best;
}

namespace detail {

// Privileged-minus-unprivileged conditional rate gap:
//   P(pred == cls | condition, a = +1) − P(pred == cls | condition, a = −1).
// `condition(i)` restricts the eligible population per group.
template <class Condition>
double rate_gap(const AuditSet& set, std::size_t attribute, std::size_t cls,
                Condition condition, const std::string& metric) {
  if (attribute >= set.schema.n_attributes())
    throw AuditError("attribute index out of range");
  if (cls >= set.schema.n_classes())
    throw AuditError("class index out of range");
  double n_priv = 0, n_unpriv = 0, hit_priv = 0, hit_unpriv = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!condition(i)) continue;
    const bool priv = set.demographic_matrix(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(attribute)) > 0;
    (priv ? n_priv : n_unpriv) += 1.0;
    const bool hit = argmax_class(set.records[i].probs) ==
                     static_cast<Eigen::Index>(cls);
    if (hit) (priv ? hit_priv : hit_unpriv) += 1.0;
  }
  if (n_priv == 0.0 || n_unpriv == 0.0)
    throw AuditError(metric + " undefined for attribute '" +
                     set.schema.attributes[attribute].first + "', class '" +
                     set.schema.classes[cls] + "': " +
                     (n_priv == 0.0 ? "privileged" : "unprivileged") +
                     " group has no qualifying samples");
  return hit_priv / n_priv - hit_unpriv / n_unpriv;
}

}  // namespace detail

// Statistical parity: gap in P(argmax = cls) between the groups.
inline double statistical_parity_gap(const AuditSet& set, std::size_t attribute,
                                     std::size_t cls) {
  return detail::rate_gap(
      set, attribute, cls, [](std::size_t) { return true; },
      "statistical parity gap");
}

// Equal opportunity: gap in true positive rate, conditioning on true == cls.
inline double equal_opportunity_gap(const AuditSet& set, std::size_t attribute,
                                    std::size_t cls) {
  const Eigen::Index target = static_cast<Eigen::Index>(cls);
  return detail::rate_gap(
      set, attribute, cls,
      [&](std::size_t i) {
        return set.schema.class_index(set.records[i].true_label) == target;
      },
      "equal opportunity gap");
}

// False positive rate gap, conditioning on true != cls.
inline double fpr_gap(const AuditSet& set, std::size_t attribute,
                      std::size_t cls) {
  const Eigen::Index target = static_cast<Eigen::Index>(cls);
  return detail::rate_gap(
      set, attribute, cls,
      [&](std::size_t i) {
        return set.schema.class_index(set.records[i].true_label) != target;
      },
      "false positive rate gap");
}

}  // namespace waf
