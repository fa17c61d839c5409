#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "waf/schema.hpp"

namespace waf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One audited sample: ground truth, softmax probabilities, raw attribute
// values, and an optional embedding shared-dimension across the log.
struct PredictionRecord {
  std::string id;
  std::string true_label;
  Vector probs;
  std::map<std::string, std::string> attrs;
  Vector embedding;  // size 0 when the log carries no embeddings
};

// Validated in-memory audit set. demographic_matrix row i is the ±1
// encoding of records[i] under the schema.
struct AuditSet {
  AttributeSchema schema;
  std::vector<PredictionRecord> records;
  Matrix demographic_matrix;

  std::size_t size() const { return records.size(); }
  bool has_embeddings() const {
    return !records.empty() && records.front().embedding.size() > 0;
  }
};

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// ±1 encoding of a record's attributes: +1 iff the (trimmed) value equals
// the schema's privileged value for that attribute.
inline Vector encode_attributes(const PredictionRecord& record,
                                const AttributeSchema& schema) {
  Vector x(schema.n_attributes());
  for (std::size_t j = 0; j < schema.n_attributes(); ++j) {
    const auto& [name, privileged] = schema.attributes[j];
    auto it = record.attrs.find(name);
    if (it == record.attrs.end())
      throw AuditError("record '" + record.id + "' missing attribute '" +
                       name + "'");
    x(static_cast<Eigen::Index>(j)) =
        trim(it->second) == trim(privileged) ? 1.0 : -1.0;
  }
  return x;
}

// One-hot vector over schema classes.
inline Vector one_hot(const std::string& true_label,
                      const AttributeSchema& schema) {
  Vector y = Vector::Zero(static_cast<Eigen::Index>(schema.n_classes()));
  y(schema.class_index(true_label)) = 1.0;
  return y;
}

namespace detail {

inline void validate_record(const PredictionRecord& r,
                            const AttributeSchema& schema,
                            Eigen::Index expected_embedding_dim) {
  if (r.probs.size() != static_cast<Eigen::Index>(schema.n_classes()))
    throw AuditError("record '" + r.id + "' has " +
                     std::to_string(r.probs.size()) + " probabilities, schema has " +
                     std::to_string(schema.n_classes()) + " classes");
  for (Eigen::Index c = 0; c < r.probs.size(); ++c)
    if (!(r.probs(c) >= 0.0 && r.probs(c) <= 1.0))
      throw AuditError("record '" + r.id + "' probability out of [0,1]");
  if (std::abs(r.probs.sum() - 1.0) > 1e-6)
    throw AuditError("record '" + r.id + "' probabilities sum to " +
                     std::to_string(r.probs.sum()) + ", expected 1 within 1e-6");
  schema.class_index(r.true_label);  // throws on unknown label
  for (const auto& [name, priv] : schema.attributes)
    if (r.attrs.find(name) == r.attrs.end())
      throw AuditError("record '" + r.id + "' missing attribute '" + name + "'");
  if (r.embedding.size() != expected_embedding_dim)
    throw AuditError("record '" + r.id + "' embedding dimension " +
                     std::to_string(r.embedding.size()) + " differs from " +
                     std::to_string(expected_embedding_dim));
}

}  // namespace detail

// Assembles and validates an AuditSet from parsed records.
inline AuditSet make_audit_set(AttributeSchema schema,
                               std::vector<PredictionRecord> records) {
  schema.validate();
  AuditSet set;
  set.schema = std::move(schema);
  set.records = std::move(records);
  const Eigen::Index embedding_dim =
      set.records.empty() ? 0 : set.records.front().embedding.size();
  set.demographic_matrix.resize(static_cast<Eigen::Index>(set.records.size()),
                                static_cast<Eigen::Index>(set.schema.n_attributes()));
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    detail::validate_record(set.records[i], set.schema, embedding_dim);
    set.demographic_matrix.row(static_cast<Eigen::Index>(i)) =
        encode_attributes(set.records[i], set.schema).transpose();
  }
  return set;
}

// --- JSONL prediction-log and schema-file I/O -------------------------------

inline PredictionRecord record_from_json(const nlohmann::json& j) {
  PredictionRecord r;
  r.id = j.at("id").get<std::string>();
  r.true_label = j.at("true_label").get<std::string>();
  const auto& probs = j.at("probs");
  r.probs.resize(static_cast<Eigen::Index>(probs.size()));
  for (std::size_t c = 0; c < probs.size(); ++c)
    r.probs(static_cast<Eigen::Index>(c)) = probs[c].get<double>();
  for (const auto& [key, value] : j.at("attrs").items())
    r.attrs[key] = value.get<std::string>();
  if (j.contains("embedding")) {
    const auto& emb = j.at("embedding");
    r.embedding.resize(static_cast<Eigen::Index>(emb.size()));
    for (std::size_t k = 0; k < emb.size(); ++k)
      r.embedding(static_cast<Eigen::Index>(k)) = emb[k].get<double>();
  }
  return r;
}

inline nlohmann::ordered_json record_to_json(const PredictionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["true_label"] = r.true_label;
  j["probs"] = std::vector<double>(r.probs.data(), r.probs.data() + r.probs.size());
  j["attrs"] = r.attrs;
  if (r.embedding.size() > 0)
    j["embedding"] = std::vector<double>(r.embedding.data(),
                                         r.embedding.data() + r.embedding.size());
  return j;
}

// Loads a line-delimited JSON prediction log and validates it against the
// schema. Parse and validation errors name the offending line or record.
inline AuditSet load_prediction_log(const std::string& path,
                                    const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw AuditError("cannot open prediction log '" + path + "'");
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      records.push_back(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw AuditError("malformed record at line " + std::to_string(line_no) +
                       " of '" + path + "': " + e.what());
    }
  }
  return make_audit_set(schema, std::move(records));
}

inline void save_prediction_log(const AuditSet& set, std::ostream& out) {
  for (const auto& r : set.records) out << record_to_json(r).dump() << "\n";
}

inline void save_prediction_log(const AuditSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw AuditError("cannot write prediction log '" + path + "'");
  save_prediction_log(set, out);
}

inline AttributeSchema schema_from_json(const nlohmann::json& j) {
  AttributeSchema s;
  for (const auto& c : j.at("classes")) s.classes.push_back(c.get<std::string>());
  for (const auto& a : j.at("attributes"))
    s.attributes.emplace_back(a.at("name").get<std::string>(),
                              a.at("privileged_value").get<std::string>());
  s.validate();
  return s;
}

inline nlohmann::ordered_json schema_to_json(const AttributeSchema& s) {
  nlohmann::ordered_json j;
  j["classes"] = s.classes;
  j["attributes"] = nlohmann::ordered_json::array();
  for (const auto& [name, priv] : s.attributes)
    j["attributes"].push_back({{"name", name}, {"privileged_value", priv}});
  return j;
}

inline AttributeSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AuditError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    return schema_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw AuditError("malformed schema file '" + path + "': " + e.what());
  }
}

// N×D embedding matrix for an embedding-bearing audit set.
inline Matrix embeddings_matrix(const AuditSet& set) {
  if (!set.has_embeddings())
    throw AuditError("audit set carries no embeddings");
  const Eigen::Index n = static_cast<Eigen::Index>(set.size());
  const Eigen::Index dim = set.records.front().embedding.size();
  Matrix out(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    out.row(i) = set.records[static_cast<std::size_t>(i)].embedding.transpose();
  return out;
}

}  // namespace waf
