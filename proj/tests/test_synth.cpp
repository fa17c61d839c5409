#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>
#include <sstream>

#include "support/fixtures.hpp"
#include "waf/error.hpp"
#include "waf/metrics.hpp"
#include "waf/synth.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::string serialized(const waf::AuditSet& set) {
  std::ostringstream out;
  waf::save_prediction_log(set, out);
  return out.str();
}

}  // namespace

TEST_CASE("generation is a pure function of config and seed", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 500;
  config.seed = 42;
  const waf::SynthDataset a = waf::generate(config, waf::default_schema());
  const waf::SynthDataset b = waf::generate(config, waf::default_schema());
  CHECK(serialized(a.audit_set) == serialized(b.audit_set));

  std::ostringstream truth_a, truth_b;
  waf::save_ground_truth(a, truth_a);
  waf::save_ground_truth(b, truth_b);
  CHECK(truth_a.str() == truth_b.str());

  config.seed = 43;
  const waf::SynthDataset c = waf::generate(config, waf::default_schema());
  CHECK(serialized(a.audit_set) != serialized(c.audit_set));
}

TEST_CASE("every probability row is a simplex point", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 800;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  for (const auto& r : data.audit_set.records) {
    CHECK_THAT(r.probs.sum(), WithinAbs(1.0, 1e-9));
    CHECK(r.probs.minCoeff() >= 0.0);
    CHECK(r.probs.maxCoeff() <= 1.0);
  }
}

TEST_CASE("with no bias mappings the classifier is nearly perfect", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.mappings = {};
  config.n_samples = 400;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto& schema = data.audit_set.schema;
  for (const auto& r : data.audit_set.records) {
    const Eigen::Index truth = schema.class_index(r.true_label);
    CHECK(waf::argmax_class(r.probs) == truth);
    CHECK(r.probs(truth) >= 0.7 - 1e-12);
    // The five losing classes share the remainder equally (up to jitter).
    double lo = 2.0, hi = -1.0;
    for (Eigen::Index c = 0; c < r.probs.size(); ++c) {
      if (c == truth) continue;
      lo = std::min(lo, r.probs(c));
      hi = std::max(hi, r.probs(c));
    }
    CHECK_THAT(hi - lo, WithinAbs(0.0, 1e-8));
  }
  for (const auto& fired : data.ground_truth) CHECK(fired.empty());
}

TEST_CASE("a fired mapping on the true class injects high error", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 2000;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto& schema = data.audit_set.schema;
  const waf::Matrix errors = waf::error_matrix(data.audit_set);

  const double err_lo = -std::log(config.low_range.second) - 1e-9;
  const double err_hi = -std::log(config.low_range.first) + 1e-9;
  int fired_true = 0;
  for (std::size_t i = 0; i < data.audit_set.size(); ++i) {
    const auto& r = data.audit_set.records[i];
    const auto& fired = data.ground_truth[i];
    if (std::find(fired.begin(), fired.end(), r.true_label) == fired.end())
      continue;
    ++fired_true;
    const Eigen::Index truth = schema.class_index(r.true_label);
    CHECK(r.probs(truth) >= config.low_range.first - 1e-12);
    CHECK(r.probs(truth) <= config.low_range.second + 1e-12);
    CHECK(errors(i, truth) >= err_lo);  // about 1.20 in natural-log units
    CHECK(errors(i, truth) <= err_hi);  // about 2.30
  }
  CHECK(fired_true > 50);  // the default design fires often enough to matter
}

TEST_CASE("all-privileged samples with a firing true class keep the drawn value",
          "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 3000;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto& schema = data.audit_set.schema;
  int seen = 0;
  for (const auto& r : data.audit_set.records) {
    if (r.true_label != "Neutral") continue;
    bool all_privileged = true;
    for (const auto& [name, priv] : schema.attributes)
      all_privileged &= (r.attrs.at(name) == priv);
    if (!all_privileged) continue;
    ++seen;
    const double p_true = r.probs(schema.class_index("Neutral"));
    CHECK(p_true >= config.low_range.first - 1e-12);
    CHECK(p_true <= config.low_range.second + 1e-12);
  }
  CHECK(seen > 5);
}

TEST_CASE("ground truth firings equal the privilege conjunction", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 700;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto& schema = data.audit_set.schema;

  for (std::size_t i = 0; i < data.audit_set.size(); ++i) {
    const auto& r = data.audit_set.records[i];
    std::set<std::string> expected;
    for (const auto& [cls, subset] : config.mappings) {
      if (subset.empty()) continue;
      bool all = true;
      for (const auto& attr : subset) {
        const auto idx = schema.attribute_index(attr);
        all &= (r.attrs.at(schema.attributes[idx].first) ==
                schema.attributes[idx].second);
      }
      if (all) expected.insert(cls);
    }
    const std::set<std::string> actual(data.ground_truth[i].begin(),
                                       data.ground_truth[i].end());
    CHECK(actual == expected);
  }
}

TEST_CASE("fear never fires and anger needs age and sex together", "[synth]") {
  const waf::BiasConfig config = waf::default_bias_config();
  CHECK(config.n_samples == 7442);
  waf::BiasConfig small = config;
  small.n_samples = 1000;
  const waf::SynthDataset data = waf::generate(small, waf::default_schema());
  const auto& schema = data.audit_set.schema;

  for (std::size_t i = 0; i < data.audit_set.size(); ++i) {
    const auto& fired = data.ground_truth[i];
    CHECK(std::find(fired.begin(), fired.end(), "Fear") == fired.end());

    const auto& attrs = data.audit_set.records[i].attrs;
    const bool age = attrs.at("AgeGroup") == "20-35";
    const bool sex = attrs.at("Sex") == "Male";
    const bool anger_fired =
        std::find(fired.begin(), fired.end(), "Anger") != fired.end();
    CHECK(anger_fired == (age && sex));
    const bool happy_fired =
        std::find(fired.begin(), fired.end(), "Happy") != fired.end();
    CHECK(happy_fired == age);  // Sex plays no role for Happy
  }
  (void)schema;
}

TEST_CASE("the anger-biased group's error dwarfs the untouched group", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 7442;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto& schema = data.audit_set.schema;
  const waf::Matrix errors = waf::error_matrix(data.audit_set);
  const Eigen::Index anger = schema.class_index("Anger");

  double biased_sum = 0.0, unbiased_sum = 0.0;
  int biased_n = 0, unbiased_n = 0;
  for (std::size_t i = 0; i < data.audit_set.size(); ++i) {
    const auto& r = data.audit_set.records[i];
    if (r.true_label != "Anger") continue;
    const bool age = r.attrs.at("AgeGroup") == "20-35";
    const bool sex = r.attrs.at("Sex") == "Male";
    if (age && sex) {
      biased_sum += errors(i, anger);
      ++biased_n;
    } else {
      unbiased_sum += errors(i, anger);
      ++unbiased_n;
    }
  }
  REQUIRE(biased_n > 100);
  REQUIRE(unbiased_n > 100);
  const double biased_mean = biased_sum / biased_n;
  const double unbiased_mean = unbiased_sum / unbiased_n;
  CHECK(biased_mean >= 5.0 * unbiased_mean);
}

TEST_CASE("invalid configurations are rejected with reasons", "[synth]") {
  const waf::AttributeSchema schema = waf::default_schema();

  waf::BiasConfig bad_range = waf::default_bias_config();
  bad_range.low_range = {0.4, 0.2};
  CHECK_THROWS_MATCHES(waf::generate(bad_range, schema), waf::AuditError,
                       Catch::Matchers::MessageMatches(
                           ContainsSubstring("must satisfy")));

  waf::BiasConfig overlap = waf::default_bias_config();
  overlap.low_range = {0.1, 0.8};
  CHECK_THROWS_AS(waf::generate(overlap, schema), waf::AuditError);

  waf::BiasConfig dup = waf::default_bias_config();
  dup.mappings.push_back({"Anger", {"Race"}});
  CHECK_THROWS_MATCHES(waf::generate(dup, schema), waf::AuditError,
                       Catch::Matchers::MessageMatches(
                           ContainsSubstring("Anger")));

  waf::BiasConfig unknown_attr = waf::default_bias_config();
  unknown_attr.mappings[0].second.push_back("Height");
  CHECK_THROWS_AS(waf::generate(unknown_attr, schema), waf::AuditError);

  waf::BiasConfig bad_marginal = waf::default_bias_config();
  bad_marginal.attribute_marginals["Sex"] = 1.0;
  CHECK_THROWS_AS(waf::generate(bad_marginal, schema), waf::AuditError);

  waf::BiasConfig empty = waf::default_bias_config();
  empty.n_samples = 0;
  CHECK_THROWS_AS(waf::generate(empty, schema), waf::AuditError);
}

TEST_CASE("config files round-trip through json", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.seed = 7;
  config.n_samples = 123;
  config.attribute_marginals["Sex"] = 0.7;
  config.embedding_dim = 5;

  const waf::BiasConfig back = waf::bias_config_from_json(waf::bias_config_to_json(config));
  CHECK(back.seed == config.seed);
  CHECK(back.n_samples == config.n_samples);
  CHECK(back.mappings == config.mappings);
  CHECK(back.attribute_marginals == config.attribute_marginals);
  CHECK(back.embedding_dim == config.embedding_dim);
  CHECK(back.low_range == config.low_range);
  CHECK(back.high_range == config.high_range);

  fixtures::TempDir dir("synth");
  const std::string path = dir.file("config.json");
  fixtures::write_file(path, waf::bias_config_to_json(config).dump(2));
  const waf::BiasConfig loaded = waf::load_bias_config(path);
  CHECK(loaded.seed == config.seed);
  CHECK(loaded.mappings == config.mappings);

  // Omitted keys fall back to the defaults.
  const waf::BiasConfig sparse =
      waf::bias_config_from_json(nlohmann::json::parse(R"({"seed": 9})"));
  CHECK(sparse.seed == 9);
  CHECK(sparse.n_samples == waf::default_bias_config().n_samples);
}

TEST_CASE("skewed marginals shift the attribute balance", "[synth]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 4000;
  config.attribute_marginals["Sex"] = 0.8;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  int male = 0;
  for (const auto& r : data.audit_set.records)
    male += r.attrs.at("Sex") == "Male";
  const double share = double(male) / 4000.0;
  CHECK(share > 0.75);
  CHECK(share < 0.85);
}

TEST_CASE("stratified split reproduces the documented constants", "[split]") {
  waf::BiasConfig config = waf::default_bias_config();
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto [train, test] = waf::split_stratified(data.audit_set, 0.8, 42);
  CHECK(train.size() == 5953);
  CHECK(test.size() == 1489);
}

TEST_CASE("stratified split balances each class within one sample", "[split]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 977;  // awkward total to exercise the remainders
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto [train, test] = waf::split_stratified(data.audit_set, 0.8, 42);

  std::map<std::string, int> full, tr;
  for (const auto& r : data.audit_set.records) ++full[r.true_label];
  for (const auto& r : train.records) ++tr[r.true_label];
  CHECK(train.size() + test.size() == data.audit_set.size());
  for (const auto& [cls, count] : full) {
    const double expected = 0.8 * count;
    CHECK(std::fabs(tr[cls] - expected) <= 1.0);
  }

  // Disjoint and exhaustive by id.
  std::set<std::string> ids;
  for (const auto& r : train.records) ids.insert(r.id);
  for (const auto& r : test.records) {
    CHECK(ids.find(r.id) == ids.end());
    ids.insert(r.id);
  }
  CHECK(ids.size() == data.audit_set.size());
}

TEST_CASE("a ten-sample class splits eight to two", "[split]") {
  std::vector<waf::PredictionRecord> records;
  for (int i = 0; i < 10; ++i)
    records.push_back(fixtures::make_record(
        "r" + std::to_string(i), "Pos", {0.9, 0.1},
        {{"Sex", i % 2 ? "Male" : "Female"}}));
  for (int i = 0; i < 10; ++i)
    records.push_back(fixtures::make_record(
        "q" + std::to_string(i), "Neg", {0.1, 0.9},
        {{"Sex", i % 2 ? "Male" : "Female"}}));
  const waf::AuditSet set =
      waf::make_audit_set(fixtures::binary_schema(), records);
  const auto [train, test] = waf::split_stratified(set, 0.8, 42);
  int train_pos = 0, test_pos = 0;
  for (const auto& r : train.records) train_pos += r.true_label == "Pos";
  for (const auto& r : test.records) test_pos += r.true_label == "Pos";
  CHECK(train_pos == 8);
  CHECK(test_pos == 2);
}

TEST_CASE("splits are deterministic and require two samples per class", "[split]") {
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 300;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto [a_train, a_test] = waf::split_stratified(data.audit_set, 0.8, 42);
  const auto [b_train, b_test] = waf::split_stratified(data.audit_set, 0.8, 42);
  CHECK(serialized(a_train) == serialized(b_train));
  CHECK(serialized(a_test) == serialized(b_test));
  const auto [c_train, c_test] = waf::split_stratified(data.audit_set, 0.8, 7);
  CHECK(serialized(a_test) != serialized(c_test));

  const waf::AuditSet tiny = waf::make_audit_set(
      fixtures::binary_schema(),
      {fixtures::make_record("a", "Pos", {0.9, 0.1}, {{"Sex", "Male"}}),
       fixtures::make_record("b", "Neg", {0.1, 0.9}, {{"Sex", "Female"}})});
  CHECK_THROWS_AS(waf::split_stratified(tiny, 0.8, 42), waf::AuditError);
}
