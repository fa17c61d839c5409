#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "waf/dataset.hpp"
#include "waf/error.hpp"
#include "waf/rng.hpp"

namespace waf {

constexpr std::uint64_t kDefaultSynthSeed = 26;

// Controls for the biased synthetic prediction-log generator. A class's
// mapping fires on a sample when the sample is privileged (+1) on every
// attribute in the subset; fired true classes draw their probability from
// low_range, everything else from high_range.
struct BiasConfig {
  std::vector<std::pair<std::string, std::vector<std::string>>> mappings;
  std::pair<double, double> low_range{0.1, 0.3};
  std::pair<double, double> high_range{0.7, 0.9};
  std::size_t n_samples = 7442;
  std::map<std::string, double> attribute_marginals;  // absent => 0.5
  std::uint64_t seed = kDefaultSynthSeed;
  // Confusion-mass shaping: how strongly misses concentrate on the
  // broadest fully-counter-stereotypical class, and the slight pull toward
  // unmapped classes. Both act on shares of the non-true residual mass.
  double confusion_boost = 3.5;
  double null_attraction = 0.01;
  // Optional linear-generative embeddings: dimension 0 carries the
  // sample's total allocative error, the rest is Gaussian noise.
  std::size_t embedding_dim = 0;
  double embedding_noise = 0.1;
};

struct SynthDataset {
  AuditSet audit_set;
  // Per sample: names of classes whose mapping fired (conjunction of
  // privileged flags over the subset).
  std::vector<std::vector<std::string>> ground_truth;
};

// BiasConfig resolved against a schema: subsets and marginals by index.
struct ResolvedBias {
  std::vector<std::vector<std::size_t>> subsets;  // per class
  std::vector<double> marginals;                  // per attribute
  std::pair<double, double> low_range;
  std::pair<double, double> high_range;
  double confusion_boost;
  double null_attraction;

  bool mapped(std::size_t cls) const { return !subsets[cls].empty(); }
  bool fires(std::size_t cls, const Vector& attrs) const {
    if (!mapped(cls)) return false;
    for (std::size_t a : subsets[cls])
      if (attrs(static_cast<Eigen::Index>(a)) < 0) return false;
    return true;
  }
  bool anti_fires(std::size_t cls, const Vector& attrs) const {
    if (!mapped(cls)) return false;
    for (std::size_t a : subsets[cls])
      if (attrs(static_cast<Eigen::Index>(a)) > 0) return false;
    return true;
  }
};

inline ResolvedBias resolve_bias(const BiasConfig& config,
                                 const AttributeSchema& schema) {
  auto check_range = [](std::pair<double, double> r, const char* name) {
    if (!(r.first > 0.0 && r.first < r.second && r.second < 1.0))
      throw AuditError(std::string(name) +
                       " must satisfy 0 < lo < hi < 1, got [" +
                       std::to_string(r.first) + ", " +
                       std::to_string(r.second) + "]");
  };
  check_range(config.low_range, "low_range");
  check_range(config.high_range, "high_range");
  if (config.low_range.second >= config.high_range.first)
    throw AuditError("low_range must sit entirely below high_range");
  if (config.n_samples == 0) throw AuditError("n_samples must be positive");
  if (config.confusion_boost <= 0.0)
    throw AuditError("confusion_boost must be positive");
  const double null_cap =
      1.0 / static_cast<double>(schema.n_classes() - 2 > 0
                                    ? schema.n_classes() - 2
                                    : 1);
  if (config.null_attraction < 0.0 || config.null_attraction >= null_cap)
    throw AuditError("null_attraction must lie in [0, " +
                     std::to_string(null_cap) + ") for " +
                     std::to_string(schema.n_classes()) + " classes");
  if (config.embedding_noise < 0.0)
    throw AuditError("embedding_noise must be non-negative");

  ResolvedBias r;
  r.subsets.assign(schema.n_classes(), {});
  std::vector<bool> seen(schema.n_classes(), false);
  for (const auto& [cls, subset] : config.mappings) {
    const auto c = static_cast<std::size_t>(schema.class_index(cls));
    if (seen[c]) throw AuditError("duplicate mapping for class '" + cls + "'");
    seen[c] = true;
    for (const auto& attr : subset) {
      const std::size_t a = schema.attribute_index(attr);
      if (std::find(r.subsets[c].begin(), r.subsets[c].end(), a) !=
          r.subsets[c].end())
        throw AuditError("attribute '" + attr + "' repeated in the mapping for '" +
                         cls + "'");
      r.subsets[c].push_back(a);
    }
  }
  r.marginals.assign(schema.n_attributes(), 0.5);
  for (const auto& [attr, p] : config.attribute_marginals) {
    if (!(p > 0.0 && p < 1.0))
      throw AuditError("marginal for '" + attr + "' must lie in (0,1)");
    r.marginals[schema.attribute_index(attr)] = p;
  }
  r.low_range = config.low_range;
  r.high_range = config.high_range;
  r.confusion_boost = config.confusion_boost;
  r.null_attraction = config.null_attraction;
  return r;
}

// Bias design mirroring the audited corpus: Anger keyed to AgeGroup+Sex,
// Disgust to Race+Ethnicity, Happy to AgeGroup alone, Neutral to all four,
// Sad to three, and Fear left unbiased.
inline BiasConfig default_bias_config() {
  BiasConfig config;
  config.mappings = {
      {"Anger", {"AgeGroup", "Sex"}},
      {"Disgust", {"Race", "Ethnicity"}},
      {"Fear", {}},
      {"Happy", {"AgeGroup"}},
      {"Neutral", {"AgeGroup", "Ethnicity", "Race", "Sex"}},
      {"Sad", {"AgeGroup", "Sex", "Race"}},
  };
  return config;
}

namespace detail {

// Breaks exact ties between residual shares without disturbing their
// ordering or measurable size; keeps downstream argmaxes generic.
constexpr double kShareJitter = 1e-9;

}  // namespace detail

// Raw class scores for one sample. The true class keeps its drawn
// probability exactly; the other classes split the residual mass. When no
// mapping fires anywhere on the sample the split is uniform. Otherwise the
// residual is shaped: unmapped classes take a near-uniform share with a
// slight pull (null_attraction), and the mapped remainder concentrates on
// fully counter-stereotypical classes - those whose whole subset is
// unprivileged - with the smallest subset (the broadest such pattern)
// weighted by confusion_boost. Output sums to 1 exactly.
inline Vector inject_bias(const Vector& attrs, std::size_t true_class,
                          const ResolvedBias& bias, SplitMix64& rng) {
  const std::size_t n_classes = bias.subsets.size();
  if (true_class >= n_classes) throw AuditError("true class out of range");

  bool any_fired = false;
  for (std::size_t c = 0; c < n_classes; ++c)
    if (bias.fires(c, attrs)) any_fired = true;

  const double p_true = bias.fires(true_class, attrs)
                            ? rng.uniform(bias.low_range.first, bias.low_range.second)
                            : rng.uniform(bias.high_range.first, bias.high_range.second);
  const double residual = 1.0 - p_true;

  Vector scores(static_cast<Eigen::Index>(n_classes));
  scores(static_cast<Eigen::Index>(true_class)) = p_true;

  const double base = residual / static_cast<double>(n_classes - 1);
  std::vector<double> weight(n_classes, 1.0);
  double null_mass = 0.0;
  if (any_fired) {
    std::size_t smallest_anti = n_classes + 1;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (c == true_class) continue;
      if (bias.anti_fires(c, attrs))
        smallest_anti = std::min(smallest_anti, bias.subsets[c].size());
      if (!bias.mapped(c)) null_mass += base * (1.0 + bias.null_attraction);
    }
    for (std::size_t c = 0; c < n_classes; ++c)
      if (c != true_class && bias.anti_fires(c, attrs) &&
          bias.subsets[c].size() == smallest_anti)
        weight[c] = bias.confusion_boost;
  }
  double weight_sum = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c)
    if (c != true_class && bias.mapped(c)) weight_sum += weight[c];
  const double mapped_mass = residual - null_mass;

  double share_sum = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (c == true_class) continue;
    double share;
    if (!any_fired)
      share = base;
    else if (!bias.mapped(c))
      share = base * (1.0 + bias.null_attraction);
    else
      share = mapped_mass * weight[c] / weight_sum;
    share *= 1.0 + detail::kShareJitter * rng.uniform();
    scores(static_cast<Eigen::Index>(c)) = share;
    share_sum += share;
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (c != true_class)
      scores(static_cast<Eigen::Index>(c)) *= residual / share_sum;
  return scores;
}

namespace detail {

inline std::string unprivileged_value(const std::string& attribute,
                                      const std::string& privileged) {
  static const std::map<std::string, std::string> complements = {
      {"AgeGroup", "other"},
      {"Ethnicity", "Hispanic"},
      {"Race", "African American"},
      {"Sex", "Female"},
  };
  auto it = complements.find(attribute);
  if (it != complements.end() && it->second != privileged) return it->second;
  return "not " + privileged;
}

}  // namespace detail

// Deterministic synthetic prediction log. Every sample owns an independent
// counter-derived random stream, so generation order never affects the
// output and samples could be produced in parallel.
inline SynthDataset generate(const BiasConfig& config,
                             const AttributeSchema& schema) {
  const ResolvedBias bias = resolve_bias(config, schema);
  const std::size_t d = schema.n_attributes();
  const std::size_t n_classes = schema.n_classes();

  std::vector<PredictionRecord> records;
  records.reserve(config.n_samples);
  std::vector<std::vector<std::string>> ground_truth(config.n_samples);

  for (std::size_t i = 0; i < config.n_samples; ++i) {
    SplitMix64 rng = SplitMix64::stream(config.seed, i);
    Vector attrs(static_cast<Eigen::Index>(d));
    for (std::size_t a = 0; a < d; ++a)
      attrs(static_cast<Eigen::Index>(a)) =
          rng.uniform() < bias.marginals[a] ? 1.0 : -1.0;
    const auto true_class = static_cast<std::size_t>(rng.below(n_classes));

    Vector scores = inject_bias(attrs, true_class, bias, rng);
    scores /= scores.sum();

    PredictionRecord r;
    r.id = "synth-" + std::to_string(i);
    r.true_label = schema.classes[true_class];
    r.probs = scores;
    for (std::size_t a = 0; a < d; ++a) {
      const auto& [name, privileged] = schema.attributes[a];
      r.attrs[name] = attrs(static_cast<Eigen::Index>(a)) > 0
                          ? privileged
                          : detail::unprivileged_value(name, privileged);
    }
    if (config.embedding_dim > 0) {
      const Vector e =
          allocative_error(one_hot(r.true_label, schema), r.probs);
      r.embedding.resize(static_cast<Eigen::Index>(config.embedding_dim));
      r.embedding(0) = e.sum();
      for (std::size_t j = 1; j < config.embedding_dim; ++j)
        r.embedding(static_cast<Eigen::Index>(j)) =
            config.embedding_noise * rng.normal();
    }
    for (std::size_t c = 0; c < n_classes; ++c)
      if (bias.fires(c, attrs)) ground_truth[i].push_back(schema.classes[c]);
    records.push_back(std::move(r));
  }

  SynthDataset out;
  out.audit_set = make_audit_set(schema, std::move(records));
  out.ground_truth = std::move(ground_truth);
  return out;
}

inline void save_ground_truth(const SynthDataset& data, std::ostream& out) {
  for (std::size_t i = 0; i < data.ground_truth.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = data.audit_set.records[i].id;
    j["fired"] = data.ground_truth[i];
    out << j.dump() << "\n";
  }
}

inline void save_ground_truth(const SynthDataset& data,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw AuditError("cannot write ground-truth sidecar '" + path + "'");
  save_ground_truth(data, out);
}

// --- Config file I/O ---------------------------------------------------------

inline BiasConfig bias_config_from_json(const nlohmann::ordered_json& j) {
  BiasConfig config = default_bias_config();
  if (j.contains("mappings")) {
    config.mappings.clear();
    for (const auto& [cls, subset] : j.at("mappings").items()) {
      std::vector<std::string> attrs;
      for (const auto& a : subset) attrs.push_back(a.get<std::string>());
      config.mappings.emplace_back(cls, std::move(attrs));
    }
  }
  auto read_range = [&](const char* key, std::pair<double, double>& range) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2)
      throw AuditError(std::string(key) + " must be a [lo, hi] pair");
    range = {r[0].get<double>(), r[1].get<double>()};
  };
  read_range("low_range", config.low_range);
  read_range("high_range", config.high_range);
  if (j.contains("n_samples")) config.n_samples = j.at("n_samples").get<std::size_t>();
  if (j.contains("attribute_marginals"))
    for (const auto& [attr, p] : j.at("attribute_marginals").items())
      config.attribute_marginals[attr] = p.get<double>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("confusion_boost"))
    config.confusion_boost = j.at("confusion_boost").get<double>();
  if (j.contains("null_attraction"))
    config.null_attraction = j.at("null_attraction").get<double>();
  if (j.contains("embedding_dim"))
    config.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  if (j.contains("embedding_noise"))
    config.embedding_noise = j.at("embedding_noise").get<double>();
  return config;
}

inline nlohmann::ordered_json bias_config_to_json(const BiasConfig& config) {
  nlohmann::ordered_json j;
  j["mappings"] = nlohmann::ordered_json::object();
  for (const auto& [cls, subset] : config.mappings) j["mappings"][cls] = subset;
  j["low_range"] = {config.low_range.first, config.low_range.second};
  j["high_range"] = {config.high_range.first, config.high_range.second};
  j["n_samples"] = config.n_samples;
  j["attribute_marginals"] = config.attribute_marginals;
  j["seed"] = config.seed;
  j["confusion_boost"] = config.confusion_boost;
  j["null_attraction"] = config.null_attraction;
  j["embedding_dim"] = config.embedding_dim;
  j["embedding_noise"] = config.embedding_noise;
  return j;
}

inline BiasConfig load_bias_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AuditError("cannot open config file '" + path + "'");
  try {
    return bias_config_from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw AuditError("malformed config file '" + path + "': " + e.what());
  }
}

// --- Stratified split --------------------------------------------------------

// Per-class 80:20-style split. The test side gets ceil(N*(1-ratio)) samples
// overall: each class contributes floor(count*(1-ratio)), and the leftover
// slots go to the classes with the largest fractional remainders (ties by
// class order). Selection within a class is a seeded shuffle; record order
// inside each side is ascending by original position, test-side classes
// concatenated in schema order.
inline std::pair<AuditSet, AuditSet> split_stratified(const AuditSet& set,
                                                      double ratio = 0.8,
                                                      std::uint64_t seed = 42) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw AuditError("split ratio must lie in (0,1)");
  const std::size_t n_classes = set.schema.n_classes();
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < set.size(); ++i)
    by_class[static_cast<std::size_t>(
                 set.schema.class_index(set.records[i].true_label))]
        .push_back(i);
  for (std::size_t c = 0; c < n_classes; ++c)
    if (by_class[c].size() < 2)
      throw AuditError("class '" + set.schema.classes[c] +
                       "' has fewer than 2 samples; cannot stratify");

  const auto test_total = static_cast<std::size_t>(
      std::ceil(static_cast<double>(set.size()) * (1.0 - ratio)));
  std::vector<std::size_t> quota(n_classes);
  std::vector<std::pair<double, std::size_t>> remainder;  // (-frac, class)
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double exact =
        static_cast<double>(by_class[c].size()) * (1.0 - ratio);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    remainder.emplace_back(-(exact - std::floor(exact)), c);
  }
  std::stable_sort(remainder.begin(), remainder.end());
  for (std::size_t r = 0; assigned < test_total; ++r, ++assigned)
    quota[remainder[r % n_classes].second] += 1;

  std::vector<bool> in_test(set.size(), false);
  std::vector<std::size_t> test_order;
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto indices = by_class[c];
    SplitMix64 rng = SplitMix64::stream(seed, c);
    for (std::size_t i = indices.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(indices[i], indices[j]);
    }
    indices.resize(std::min(quota[c], indices.size()));
    std::sort(indices.begin(), indices.end());
    for (std::size_t idx : indices) {
      in_test[idx] = true;
      test_order.push_back(idx);
    }
  }

  std::vector<PredictionRecord> train_records, test_records;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (!in_test[i]) train_records.push_back(set.records[i]);
  for (std::size_t idx : test_order) test_records.push_back(set.records[idx]);
  return {make_audit_set(set.schema, std::move(train_records)),
          make_audit_set(set.schema, std::move(test_records))};
}

}  // namespace waf
