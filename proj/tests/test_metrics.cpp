#include <catch2/catch_amalgamated.hpp>

#include "support/fixtures.hpp"
#include "waf/metrics.hpp"
#include "waf/synth.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using fixtures::make_record;

namespace {

// Binary-schema helper: one record with a chosen group and outcome.
waf::PredictionRecord sample(int idx, bool privileged, bool true_pos,
                             bool predicted_pos) {
  return make_record(
      "s" + std::to_string(idx), true_pos ? "Pos" : "Neg",
      predicted_pos ? std::vector<double>{0.9, 0.1} : std::vector<double>{0.1, 0.9},
      {{"Sex", privileged ? "Male" : "Female"}});
}

waf::AuditSet counting_fixture() {
  std::vector<waf::PredictionRecord> records;
  int idx = 0;
  // Privileged: 10 with true Pos, 2 of them predicted Pos (TPR 0.2),
  // plus 4 with true Neg, 2 predicted Pos (FPR 0.5).
  for (int i = 0; i < 10; ++i) records.push_back(sample(idx++, true, true, i < 2));
  for (int i = 0; i < 4; ++i) records.push_back(sample(idx++, true, false, i < 2));
  // Unprivileged: 10 with true Pos, 9 predicted Pos (TPR 0.9),
  // plus 5 with true Neg, none predicted Pos (FPR 0).
  for (int i = 0; i < 10; ++i) records.push_back(sample(idx++, false, true, i < 9));
  for (int i = 0; i < 5; ++i) records.push_back(sample(idx++, false, false, false));
  return waf::make_audit_set(fixtures::binary_schema(), records);
}

}  // namespace

TEST_CASE("argmax takes the first index on ties", "[metrics]") {
  waf::Vector probs(3);
  probs << 0.4, 0.4, 0.2;
  CHECK(waf::argmax_class(probs) == 0);
  probs << 0.1, 0.2, 0.7;
  CHECK(waf::argmax_class(probs) == 2);
}

TEST_CASE("equal opportunity gap counts true-positive rates", "[metrics]") {
  const waf::AuditSet set = counting_fixture();
  CHECK_THAT(waf::equal_opportunity_gap(set, 0, 0), WithinAbs(-0.7, 1e-12));
}

TEST_CASE("false positive rate gap counts negatives only", "[metrics]") {
  const waf::AuditSet set = counting_fixture();
  CHECK_THAT(waf::fpr_gap(set, 0, 0), WithinAbs(0.5, 1e-12));
}

TEST_CASE("statistical parity spans identical to extreme designs", "[metrics]") {
  std::vector<waf::PredictionRecord> same;
  int idx = 0;
  for (bool priv : {true, false})
    for (int i = 0; i < 4; ++i)
      same.push_back(sample(idx++, priv, i % 2, i % 2));
  const waf::AuditSet identical = waf::make_audit_set(fixtures::binary_schema(), same);
  CHECK_THAT(waf::statistical_parity_gap(identical, 0, 0), WithinAbs(0.0, 1e-12));

  std::vector<waf::PredictionRecord> extreme;
  idx = 0;
  for (int i = 0; i < 3; ++i) extreme.push_back(sample(idx++, true, true, true));
  for (int i = 0; i < 3; ++i) extreme.push_back(sample(idx++, false, true, false));
  const waf::AuditSet polar = waf::make_audit_set(fixtures::binary_schema(), extreme);
  CHECK_THAT(waf::statistical_parity_gap(polar, 0, 0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("a perfect classifier has zero EO and FPR gaps", "[metrics]") {
  std::vector<waf::PredictionRecord> records;
  int idx = 0;
  for (bool priv : {true, false}) {
    for (int i = 0; i < 3; ++i) records.push_back(sample(idx++, priv, true, true));
    for (int i = 0; i < 3; ++i) records.push_back(sample(idx++, priv, false, false));
  }
  const waf::AuditSet set = waf::make_audit_set(fixtures::binary_schema(), records);
  CHECK_THAT(waf::equal_opportunity_gap(set, 0, 0), WithinAbs(0.0, 1e-12));
  CHECK_THAT(waf::fpr_gap(set, 0, 0), WithinAbs(0.0, 1e-12));
}

TEST_CASE("swapping the privileged value negates every gap", "[metrics]") {
  const waf::AuditSet set = counting_fixture();
  waf::AttributeSchema swapped_schema = set.schema;
  swapped_schema.attributes[0].second = "Female";
  const waf::AuditSet swapped =
      waf::make_audit_set(swapped_schema, set.records);

  CHECK_THAT(waf::statistical_parity_gap(swapped, 0, 0),
             WithinAbs(-waf::statistical_parity_gap(set, 0, 0), 1e-12));
  CHECK_THAT(waf::equal_opportunity_gap(swapped, 0, 0),
             WithinAbs(-waf::equal_opportunity_gap(set, 0, 0), 1e-12));
  CHECK_THAT(waf::fpr_gap(swapped, 0, 0),
             WithinAbs(-waf::fpr_gap(set, 0, 0), 1e-12));
}

TEST_CASE("gaps stay within [-1, 1] on the counting fixture", "[metrics]") {
  const waf::AuditSet set = counting_fixture();
  for (double gap : {waf::statistical_parity_gap(set, 0, 0),
                     waf::equal_opportunity_gap(set, 0, 0),
                     waf::fpr_gap(set, 0, 0)}) {
    CHECK(gap >= -1.0);
    CHECK(gap <= 1.0);
  }
}

TEST_CASE("empty conditioning groups are reported by name", "[metrics]") {
  std::vector<waf::PredictionRecord> only_priv;
  for (int i = 0; i < 4; ++i) only_priv.push_back(sample(i, true, i % 2, i % 2));
  const waf::AuditSet priv_only =
      waf::make_audit_set(fixtures::binary_schema(), only_priv);
  CHECK_THROWS_MATCHES(
      waf::statistical_parity_gap(priv_only, 0, 0), waf::AuditError,
      Catch::Matchers::MessageMatches(ContainsSubstring("'Sex'") &&
                                      ContainsSubstring("unprivileged")));

  // Both groups present, but the privileged one has no true-Pos samples.
  std::vector<waf::PredictionRecord> no_true_pos{
      sample(0, true, false, false), sample(1, false, true, true),
      sample(2, false, false, false)};
  const waf::AuditSet eo_degenerate =
      waf::make_audit_set(fixtures::binary_schema(), no_true_pos);
  CHECK_THROWS_MATCHES(
      waf::equal_opportunity_gap(eo_degenerate, 0, 0), waf::AuditError,
      Catch::Matchers::MessageMatches(ContainsSubstring("'Pos'")));

  // The unprivileged group is all true-Pos, so FPR has no negatives there.
  std::vector<waf::PredictionRecord> no_negatives{
      sample(0, true, true, true), sample(1, true, false, false),
      sample(2, false, true, true)};
  const waf::AuditSet fpr_degenerate =
      waf::make_audit_set(fixtures::binary_schema(), no_negatives);
  CHECK_THROWS_AS(waf::fpr_gap(fpr_degenerate, 0, 0), waf::AuditError);
}

TEST_CASE("biased synthesis drives the Anger parity gap negative", "[metrics]") {
  // The generator boosts Anger confusion for fully unprivileged samples and
  // suppresses correct Anger predictions for privileged ones, so privileged
  // samples are predicted Anger less often.
  waf::BiasConfig config = waf::default_bias_config();
  config.n_samples = 3000;
  const waf::SynthDataset data = waf::generate(config, waf::default_schema());
  const auto& schema = data.audit_set.schema;
  const std::size_t sex = schema.attribute_index("Sex");
  const Eigen::Index anger = schema.class_index("Anger");
  CHECK(waf::statistical_parity_gap(data.audit_set, sex,
                                    static_cast<std::size_t>(anger)) < 0.0);
}
