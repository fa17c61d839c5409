#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "waf/correlation.hpp"
#include "waf/dataset.hpp"
#include "waf/metrics.hpp"
#include "waf/mutual_information.hpp"

namespace waf {

// One attribute-class cell of the study table. Validity flags mark cells a
// metric could not define on this data (empty conditioning group, too few
// samples for binning, ...); invalid cells are dropped pairwise from the
// correlations.
struct MetricCell {
  double mi = 0.0;
  double waf = 0.0;
  double sp = 0.0;
  double eo = 0.0;
  double fpr = 0.0;
  bool mi_valid = false;
  bool sp_valid = false;
  bool eo_valid = false;
  bool fpr_valid = false;
};

struct MetricTable {
  std::vector<std::vector<MetricCell>> cells;  // [attribute][class]
  std::vector<std::string> warnings;
};

// Correlation of one metric's cells against the mutual-information cells.
struct StudyCorrelation {
  std::string metric;
  bool valid = false;
  std::string note;  // why the correlation is undefined, when it is
  Correlation pearson_r;
  Correlation spearman_rho;
  std::size_t n_pairs = 0;
};

struct CorrelationReport {
  std::vector<StudyCorrelation> metrics;  // WAF, SP, EO, FPR
  bool abs_waf = false;
};

struct StudyResult {
  MetricTable table;
  CorrelationReport correlations;
};

// Dependence ground truth for one attribute-class pair: mutual information
// between the attribute and the class's error, measured within the samples
// whose true label is that class. Conditioning on the label isolates how
// the classifier's error on the class varies with the attribute, rather
// than how the label mix does.
inline double class_conditional_mi(const AuditSet& set, const Matrix& errors,
                                   std::size_t attribute, std::size_t cls,
                                   int bins = kDefaultBins) {
  const Eigen::Index target = static_cast<Eigen::Index>(cls);
  std::vector<double> attr_vals, err_vals;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.schema.class_index(set.records[i].true_label) != target) continue;
    attr_vals.push_back(set.demographic_matrix(
        static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(attribute)));
    err_vals.push_back(errors(static_cast<Eigen::Index>(i), target));
  }
  const auto n = static_cast<Eigen::Index>(attr_vals.size());
  return mutual_information(
      Eigen::Map<const Vector>(attr_vals.data(), n),
      Eigen::Map<const Vector>(err_vals.data(), n), bins);
}

namespace detail {

template <class Compute>
void fill_cell(double& value, bool& valid, std::vector<std::string>& warnings,
               const AuditSet& set, std::size_t attribute, std::size_t cls,
               const char* metric, Compute compute) {
  try {
    value = compute();
    valid = true;
  } catch (const AuditError& e) {
    valid = false;
    warnings.push_back(std::string(metric) + " cell (" +
                       set.schema.attributes[attribute].first + ", " +
                       set.schema.classes[cls] + ") excluded: " + e.what());
  }
}

inline StudyCorrelation correlate_against_mi(
    const MetricTable& table, const std::string& metric,
    double MetricCell::*field, bool MetricCell::*flag,
    std::vector<std::string>& warnings) {
  StudyCorrelation out;
  out.metric = metric;
  std::vector<double> xs, ys;
  for (const auto& row : table.cells)
    for (const auto& cell : row) {
      if (!cell.mi_valid || !(cell.*flag)) continue;
      xs.push_back(cell.*field);
      ys.push_back(cell.mi);
    }
  out.n_pairs = xs.size();
  const auto n = static_cast<Eigen::Index>(xs.size());
  try {
    out.pearson_r = pearson(Eigen::Map<const Vector>(xs.data(), n),
                            Eigen::Map<const Vector>(ys.data(), n));
    out.spearman_rho = spearman(Eigen::Map<const Vector>(xs.data(), n),
                                Eigen::Map<const Vector>(ys.data(), n));
    out.valid = true;
  } catch (const AuditError& e) {
    out.valid = false;
    out.note = e.what();
    warnings.push_back(metric + " correlation undefined: " + e.what());
  }
  return out;
}

}  // namespace detail

// Fills the full attribute-by-class table of MI, WAF, SP, EO, and FPR
// values, then correlates each metric's cells against the MI cells.
// waf_scores is the attribute-by-class score table of the fitted model; it
// enters signed unless abs_waf is set.
inline StudyResult correlation_study(const AuditSet& set, const Matrix& errors,
                                     const Matrix& waf_scores,
                                     int bins = kDefaultBins,
                                     bool abs_waf = false) {
  const std::size_t d = set.schema.n_attributes();
  const std::size_t n_classes = set.schema.n_classes();
  if (waf_scores.rows() != static_cast<Eigen::Index>(d) ||
      waf_scores.cols() != static_cast<Eigen::Index>(n_classes))
    throw AuditError("score table shape does not match the schema");

  StudyResult result;
  result.table.cells.assign(d, std::vector<MetricCell>(n_classes));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      MetricCell& cell = result.table.cells[a][c];
      cell.waf = abs_waf ? std::abs(waf_scores(static_cast<Eigen::Index>(a),
                                               static_cast<Eigen::Index>(c)))
                         : waf_scores(static_cast<Eigen::Index>(a),
                                      static_cast<Eigen::Index>(c));
      auto& warnings = result.table.warnings;
      detail::fill_cell(cell.mi, cell.mi_valid, warnings, set, a, c, "MI",
                        [&] { return class_conditional_mi(set, errors, a, c, bins); });
      detail::fill_cell(cell.sp, cell.sp_valid, warnings, set, a, c, "SP",
                        [&] { return statistical_parity_gap(set, a, c); });
      detail::fill_cell(cell.eo, cell.eo_valid, warnings, set, a, c, "EO",
                        [&] { return equal_opportunity_gap(set, a, c); });
      detail::fill_cell(cell.fpr, cell.fpr_valid, warnings, set, a, c, "FPR",
                        [&] { return fpr_gap(set, a, c); });
    }
  }

  result.correlations.abs_waf = abs_waf;
  auto& warnings = result.table.warnings;
  result.correlations.metrics.push_back(detail::correlate_against_mi(
      result.table, "WAF", &MetricCell::waf, &MetricCell::mi_valid, warnings));
  result.correlations.metrics.push_back(detail::correlate_against_mi(
      result.table, "SP", &MetricCell::sp, &MetricCell::sp_valid, warnings));
  result.correlations.metrics.push_back(detail::correlate_against_mi(
      result.table, "EO", &MetricCell::eo, &MetricCell::eo_valid, warnings));
  result.correlations.metrics.push_back(detail::correlate_against_mi(
      result.table, "FPR", &MetricCell::fpr, &MetricCell::fpr_valid, warnings));
  return result;
}

}  // namespace waf
