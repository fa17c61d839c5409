#pragma once

#include <cstdint>
#include <fmt/core.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "waf/dataset.hpp"
#include "waf/groups.hpp"
#include "waf/linear_model.hpp"
#include "waf/study.hpp"
#include "waf/sweep.hpp"

namespace waf {

using OrderedJson = nlohmann::ordered_json;

// 64-bit FNV-1a over a string, as 16 hex digits; used to fingerprint the
// exact parameter set a report was produced from.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001B3ULL;
  }
  return fmt::format("{:016x}", hash);
}

struct RunParameters {
  std::string command;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  double lambda = kDefaultRidge;
  double epsilon = kDefaultEpsilon;
  int bins = kDefaultBins;
  double holdout = 0.0;
  bool abs_waf = false;

  OrderedJson to_json() const {
    OrderedJson j;
    j["command"] = command;
    j["seed"] = seed;
    j["k"] = k;
    j["ridge"] = lambda;
    j["epsilon"] = epsilon;
    j["bins"] = bins;
    j["holdout"] = holdout;
    j["abs_waf"] = abs_waf;
    return j;
  }
};

// Everything one command run produced, serializable to a byte-stable
// structured report plus flat CSV side tables.
struct AuditReport {
  RunParameters params;
  AttributeSchema schema;
  std::optional<Matrix> waf_scores;  // d×C
  std::optional<Vector> mse_per_class;
  std::optional<double> mse;
  std::optional<double> holdout_mse;
  std::optional<StudyResult> study;
  std::optional<GroupReport> groups;
  std::optional<SweepResult> sweep;

  OrderedJson to_json() const;
  void save(const std::string& path) const;
};

namespace detail {

inline OrderedJson vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace detail

inline OrderedJson waf_table_json(const AttributeSchema& schema,
                                  const Matrix& scores) {
  OrderedJson j;
  j["attributes"] = OrderedJson::array();
  for (const auto& [name, priv] : schema.attributes) j["attributes"].push_back(name);
  j["classes"] = schema.classes;
  j["scores_by_attribute"] = OrderedJson::object();
  for (std::size_t a = 0; a < schema.n_attributes(); ++a)
    j["scores_by_attribute"][schema.attributes[a].first] =
        detail::vector_json(scores.row(static_cast<Eigen::Index>(a)));
  return j;
}

inline OrderedJson study_json(const AttributeSchema& schema,
                              const StudyResult& study) {
  OrderedJson j;
  j["cells"] = OrderedJson::array();
  for (std::size_t a = 0; a < study.table.cells.size(); ++a) {
    for (std::size_t c = 0; c < study.table.cells[a].size(); ++c) {
      const MetricCell& cell = study.table.cells[a][c];
      OrderedJson row;
      row["attribute"] = schema.attributes[a].first;
      row["class"] = schema.classes[c];
      row["mi"] = cell.mi_valid ? OrderedJson(cell.mi) : OrderedJson(nullptr);
      row["waf"] = cell.waf;
      row["sp"] = cell.sp_valid ? OrderedJson(cell.sp) : OrderedJson(nullptr);
      row["eo"] = cell.eo_valid ? OrderedJson(cell.eo) : OrderedJson(nullptr);
      row["fpr"] = cell.fpr_valid ? OrderedJson(cell.fpr) : OrderedJson(nullptr);
      j["cells"].push_back(std::move(row));
    }
  }
  j["correlations"] = OrderedJson::array();
  for (const StudyCorrelation& m : study.correlations.metrics) {
    OrderedJson row;
    row["metric"] = m.metric;
    row["valid"] = m.valid;
    row["n_pairs"] = m.n_pairs;
    if (m.valid) {
      row["pearson_r"] = m.pearson_r.r;
      row["pearson_p"] = m.pearson_r.p;
      row["spearman_rho"] = m.spearman_rho.r;
      row["spearman_p"] = m.spearman_rho.p;
    } else {
      row["note"] = m.note;
    }
    j["correlations"].push_back(std::move(row));
  }
  j["warnings"] = study.table.warnings;
  return j;
}

inline OrderedJson group_report_json(const GroupReport& report) {
  OrderedJson j = OrderedJson::array();
  for (const GroupRow& row : report.rows) {
    OrderedJson r;
    r["group"] = row.label;
    r["count"] = row.count;
    if (row.count > 0) {
      r["empirical"] = detail::vector_json(row.empirical);
      r["estimate"] = detail::vector_json(row.estimate);
      r["abs_deviation"] = detail::vector_json(row.abs_deviation);
      r["distance"] = row.distance;
    } else {
      r["estimate"] = detail::vector_json(row.estimate);
    }
    j.push_back(std::move(r));
  }
  return j;
}

inline OrderedJson sweep_json(const SweepResult& sweep) {
  OrderedJson j;
  j["points"] = OrderedJson::array();
  for (const SweepPoint& p : sweep.points)
    j["points"].push_back({{"k", p.k}, {"overall_mse", p.overall_mse}});
  j["mean_regressor_mse"] = sweep.mean_regressor_mse;
  return j;
}

inline OrderedJson AuditReport::to_json() const {
  OrderedJson j;
  j["run"] = params.to_json();
  j["run"]["config_digest"] = fnv1a_hex(params.to_json().dump());
  j["schema"] = schema_to_json(schema);
  if (waf_scores) j["waf_scores"] = waf_table_json(schema, *waf_scores);
  if (mse_per_class) {
    j["fit"] = OrderedJson::object();
    j["fit"]["mse_per_class"] = detail::vector_json(*mse_per_class);
    j["fit"]["mse_overall"] = *mse;
    if (holdout_mse) j["fit"]["mse_holdout"] = *holdout_mse;
  }
  if (study) j["study"] = study_json(schema, *study);
  if (groups) j["groups"] = group_report_json(*groups);
  if (sweep) j["sweep"] = sweep_json(*sweep);
  return j;
}

inline void AuditReport::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw AuditError("cannot write report '" + path + "'");
  out << to_json().dump(2) << "\n";
}

// --- Flat CSV side tables ----------------------------------------------------

// Score table layout: one row per class, one column per attribute.
inline void write_waf_csv(const AttributeSchema& schema, const Matrix& scores,
                          std::ostream& out) {
  out << "class";
  for (const auto& [name, priv] : schema.attributes) out << "," << name;
  out << "\n";
  out.precision(17);
  for (std::size_t c = 0; c < schema.n_classes(); ++c) {
    out << schema.classes[c];
    for (std::size_t a = 0; a < schema.n_attributes(); ++a)
      out << "," << scores(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
    out << "\n";
  }
}

// One row per attribute-class pair; metric cells a run could not define
// are left empty.
inline void write_metric_csv(const AttributeSchema& schema,
                             const StudyResult& study, std::ostream& out) {
  out << "attribute,class,mi,waf,sp,eo,fpr\n";
  out.precision(17);
  for (std::size_t a = 0; a < study.table.cells.size(); ++a) {
    for (std::size_t c = 0; c < study.table.cells[a].size(); ++c) {
      const MetricCell& cell = study.table.cells[a][c];
      out << schema.attributes[a].first << "," << schema.classes[c] << ",";
      if (cell.mi_valid) out << cell.mi;
      out << "," << cell.waf << ",";
      if (cell.sp_valid) out << cell.sp;
      out << ",";
      if (cell.eo_valid) out << cell.eo;
      out << ",";
      if (cell.fpr_valid) out << cell.fpr;
      out << "\n";
    }
  }
}

inline void write_group_csv(const AttributeSchema& schema,
                            const GroupReport& report, std::ostream& out) {
  out << "group,count";
  for (const auto& cls : schema.classes) out << ",empirical_" << cls;
  for (const auto& cls : schema.classes) out << ",estimate_" << cls;
  out << ",distance\n";
  out.precision(17);
  for (const GroupRow& row : report.rows) {
    out << row.label << "," << row.count;
    for (Eigen::Index c = 0; c < row.estimate.size(); ++c) {
      out << ",";
      if (row.count > 0) out << row.empirical(c);
    }
    for (Eigen::Index c = 0; c < row.estimate.size(); ++c)
      out << "," << row.estimate(c);
    out << ",";
    if (row.count > 0) out << row.distance;
    out << "\n";
  }
}

inline void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "k,overall_mse\n";
  out.precision(17);
  for (const SweepPoint& p : sweep.points)
    out << p.k << "," << p.overall_mse << "\n";
  out << "mean_regressor," << sweep.mean_regressor_mse << "\n";
}

// --- Printed summaries (three decimals, aligned) -----------------------------

inline std::string format_waf_table(const AttributeSchema& schema,
                                    const Matrix& scores) {
  std::string out = fmt::format("{:<10}", "class");
  for (const auto& [name, priv] : schema.attributes)
    out += fmt::format(" {:>12}", name);
  out += "\n";
  for (std::size_t c = 0; c < schema.n_classes(); ++c) {
    out += fmt::format("{:<10}", schema.classes[c]);
    for (std::size_t a = 0; a < schema.n_attributes(); ++a)
      out += fmt::format(" {:>12.3f}", scores(static_cast<Eigen::Index>(a),
                                              static_cast<Eigen::Index>(c)));
    out += "\n";
  }
  return out;
}

inline std::string format_correlation_summary(const CorrelationReport& report) {
  std::string out =
      fmt::format("{:<8} {:>10} {:>10} {:>10} {:>10} {:>7}\n", "metric",
                  "pearson_r", "p", "spearman", "p", "pairs");
  for (const StudyCorrelation& m : report.metrics) {
    if (m.valid)
      out += fmt::format("{:<8} {:>10.3f} {:>10.3g} {:>10.3f} {:>10.3g} {:>7}\n",
                         m.metric, m.pearson_r.r, m.pearson_r.p,
                         m.spearman_rho.r, m.spearman_rho.p, m.n_pairs);
    else
      out += fmt::format("{:<8} undefined ({})\n", m.metric, m.note);
  }
  return out;
}

inline std::string format_group_table(const GroupReport& report) {
  std::string out = fmt::format("{:<8} {:>7} {:>12} {:>12} {:>10}\n", "group",
                                "count", "total_emp", "total_est", "distance");
  for (const GroupRow& row : report.rows) {
    if (row.count > 0)
      out += fmt::format("{:<8} {:>7} {:>12.3f} {:>12.3f} {:>10.3f}\n",
                         row.label, row.count, row.empirical.sum(),
                         row.estimate.sum(), row.distance);
    else
      out += fmt::format("{:<8} {:>7} {:>12} {:>12} {:>10}\n", row.label,
                         row.count, "-", "-", "-");
  }
  return out;
}

}  // namespace waf
