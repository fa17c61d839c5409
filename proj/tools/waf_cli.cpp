// Command-line front end: synthetic log generation, audits, the
// metric-vs-dependence validation study, embedding-count sweeps, and joint
// demographic group comparisons.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fmt/core.h>
#include <string>
#include <vector>

#include "waf/waf.hpp"

namespace {

// Paths this run has created; on failure everything is removed so a
// nonzero exit never leaves partial outputs behind.
class OutputTracker {
 public:
  std::ofstream open(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw waf::AuditError("cannot write '" + path + "'");
    written_.push_back(path);
    return out;
  }

  void track(const std::string& path) { written_.push_back(path); }

  void discard_all() {
    for (const auto& path : written_) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
  }

 private:
  std::vector<std::filesystem::path> written_;
};

// "dir/report.json" + "_waf.csv" -> "dir/report_waf.csv"
std::string sibling(const std::string& out, const std::string& suffix) {
  const std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

waf::AttributeSchema load_schema_or_default(const std::string& path) {
  return path.empty() ? waf::default_schema() : waf::load_schema(path);
}

struct FitOptions {
  std::string log;
  std::string schema;
  std::size_t k = 0;
  double ridge = waf::kDefaultRidge;
  double epsilon = waf::kDefaultEpsilon;
};

struct FittedAudit {
  waf::AuditSet set;
  waf::Matrix errors;
  waf::DesignMatrix design;
  waf::WafModel model;
};

FittedAudit load_and_fit(const FitOptions& opt) {
  FittedAudit fit;
  fit.set = waf::load_prediction_log(opt.log, load_schema_or_default(opt.schema));
  fit.errors = waf::error_matrix(fit.set, opt.epsilon);
  fit.design = waf::build_design_matrix(fit.set, opt.k);
  fit.model = waf::fit_linear(fit.design.X, fit.errors,
                              fit.set.schema.n_attributes(), opt.ridge);
  return fit;
}

int run_synth(const std::string& config_path, const std::string& schema_path,
              std::uint64_t seed, bool seed_given, const std::string& out) {
  OutputTracker outputs;
  try {
    waf::BiasConfig config = config_path.empty()
                                 ? waf::default_bias_config()
                                 : waf::load_bias_config(config_path);
    if (seed_given) config.seed = seed;
    const waf::AttributeSchema schema = load_schema_or_default(schema_path);
    const waf::SynthDataset data = waf::generate(config, schema);

    auto log_out = outputs.open(out);
    waf::save_prediction_log(data.audit_set, log_out);
    const std::string sidecar = sibling(out, ".truth.jsonl");
    auto truth_out = outputs.open(sidecar);
    waf::save_ground_truth(data, truth_out);

    fmt::print("wrote {} records to {} (ground truth: {})\n",
               data.audit_set.size(), out, sidecar);
    return 0;
  } catch (const std::exception& e) {
    outputs.discard_all();
    fmt::print(stderr, "synth failed: {}\n", e.what());
    return 1;
  }
}

int run_audit(const FitOptions& opt, double holdout, const std::string& out) {
  OutputTracker outputs;
  try {
    FittedAudit fit = load_and_fit(opt);

    waf::AuditReport report;
    report.params = {"audit", 0, opt.k, opt.ridge, opt.epsilon,
                     waf::kDefaultBins, holdout, false};
    report.schema = fit.set.schema;
    report.waf_scores = fit.model.waf_scores();
    report.mse_per_class =
        waf::mse_per_class(fit.model.predict(fit.design.X), fit.errors);
    report.mse = report.mse_per_class->mean();
    if (holdout > 0.0) {
      auto [train, test] = waf::split_stratified(fit.set, 1.0 - holdout);
      const waf::Matrix train_errors = waf::error_matrix(train, opt.epsilon);
      const waf::DesignMatrix train_design =
          waf::build_design_matrix(train, opt.k);
      const waf::WafModel held = waf::fit_linear(
          train_design.X, train_errors, train.schema.n_attributes(), opt.ridge);
      waf::DesignMatrix test_design;
      if (opt.k == 0) {
        test_design = {test.demographic_matrix, {}};
      } else {
        const waf::Matrix train_emb = waf::embeddings_matrix(train);
        test_design = waf::build_design_matrix(
            test.demographic_matrix, waf::embeddings_matrix(test),
            waf::pca_first_component(train_emb), opt.k);
      }
      report.holdout_mse = waf::mse_overall(held.predict(test_design.X),
                                            waf::error_matrix(test, opt.epsilon));
    }
    outputs.track(out);
    report.save(out);
    auto csv = outputs.open(sibling(out, "_waf.csv"));
    waf::write_waf_csv(fit.set.schema, *report.waf_scores, csv);

    fmt::print("{}", waf::format_waf_table(fit.set.schema, *report.waf_scores));
    fmt::print("overall mse {:.6f}\n", *report.mse);
    return 0;
  } catch (const std::exception& e) {
    outputs.discard_all();
    fmt::print(stderr, "audit failed: {}\n", e.what());
    return 1;
  }
}

int run_validate(const FitOptions& opt, int bins, bool abs_waf,
                 const std::string& out) {
  OutputTracker outputs;
  try {
    FittedAudit fit = load_and_fit(opt);
    const waf::Matrix scores = fit.model.waf_scores();
    const waf::StudyResult study =
        waf::correlation_study(fit.set, fit.errors, scores, bins, abs_waf);

    waf::AuditReport report;
    report.params = {"validate", 0,    opt.k,  opt.ridge,
                     opt.epsilon, bins, 0.0,    abs_waf};
    report.schema = fit.set.schema;
    report.waf_scores = scores;
    report.study = study;
    outputs.track(out);
    report.save(out);
    auto csv = outputs.open(sibling(out, "_metrics.csv"));
    waf::write_metric_csv(fit.set.schema, study, csv);

    for (const auto& warning : study.table.warnings)
      fmt::print(stderr, "warning: {}\n", warning);
    fmt::print("{}", waf::format_correlation_summary(study.correlations));
    return 0;
  } catch (const std::exception& e) {
    outputs.discard_all();
    fmt::print(stderr, "validate failed: {}\n", e.what());
    return 1;
  }
}

int run_sweep(const FitOptions& opt, const std::string& grid,
              const std::string& out) {
  OutputTracker outputs;
  try {
    std::vector<std::size_t> k_grid;
    std::size_t start = 0;
    while (start <= grid.size()) {
      const std::size_t comma = std::min(grid.find(',', start), grid.size());
      const std::string token = grid.substr(start, comma - start);
      start = comma + 1;
      if (token.empty()) continue;
      std::size_t consumed = 0;
      unsigned long long value = 0;
      try {
        value = std::stoull(token, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != token.size())
        throw waf::AuditError("grid entry '" + token + "' is not a count");
      k_grid.push_back(static_cast<std::size_t>(value));
    }
    if (k_grid.empty()) throw waf::AuditError("empty sweep grid");

    const waf::AuditSet set =
        waf::load_prediction_log(opt.log, load_schema_or_default(opt.schema));
    const waf::Matrix errors = waf::error_matrix(set, opt.epsilon);
    const waf::SweepResult sweep =
        waf::sweep_k(set, errors, k_grid, opt.ridge);

    waf::AuditReport report;
    report.params = {"sweep-k", 0,   0,   opt.ridge,
                     opt.epsilon, waf::kDefaultBins, 0.0, false};
    report.schema = set.schema;
    report.sweep = sweep;
    outputs.track(out);
    report.save(out);
    auto csv = outputs.open(sibling(out, "_sweep.csv"));
    waf::write_sweep_csv(sweep, csv);

    for (const auto& point : sweep.points)
      fmt::print("k {:>5}  mse {:.6f}\n", point.k, point.overall_mse);
    fmt::print("mean-regressor reference mse {:.6f}\n",
               sweep.mean_regressor_mse);
    return 0;
  } catch (const std::exception& e) {
    outputs.discard_all();
    fmt::print(stderr, "sweep-k failed: {}\n", e.what());
    return 1;
  }
}

int run_groups(const FitOptions& opt, const std::string& out) {
  OutputTracker outputs;
  try {
    FittedAudit fit = load_and_fit(opt);
    const waf::GroupReport groups =
        waf::group_distance_report(fit.set, fit.errors, fit.model);

    waf::AuditReport report;
    report.params = {"groups", 0,    opt.k, opt.ridge,
                     opt.epsilon, waf::kDefaultBins, 0.0, false};
    report.schema = fit.set.schema;
    report.waf_scores = fit.model.waf_scores();
    report.groups = groups;
    outputs.track(out);
    report.save(out);
    auto csv = outputs.open(sibling(out, "_groups.csv"));
    waf::write_group_csv(fit.set.schema, groups, csv);

    fmt::print("{}", waf::format_group_table(groups));
    return 0;
  } catch (const std::exception& e) {
    outputs.discard_all();
    fmt::print(stderr, "groups failed: {}\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 1;
  if (const char* env = std::getenv("WAF_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) threads = parsed;
  }
  Eigen::setNbThreads(threads);

  CLI::App app{"Fairness audit toolkit: per-class error attribution over demographic attributes"};
  app.require_subcommand(1);

  std::string config_path, schema_path, log_path, out_path, grid = "0";
  std::uint64_t seed = waf::kDefaultSynthSeed;
  FitOptions fit_options;
  double holdout = 0.0;
  int bins = waf::kDefaultBins;
  bool abs_waf = false;

  auto* synth = app.add_subcommand("synth", "generate a biased synthetic prediction log");
  synth->add_option("--config", config_path, "generator config file (defaults built in)");
  synth->add_option("--schema", schema_path, "schema file (defaults built in)");
  auto* seed_opt = synth->add_option("--seed", seed, "override the config seed");
  synth->add_option("--out", out_path, "prediction log path")->required();

  auto add_fit_options = [&](CLI::App* cmd, bool with_k = true) {
    cmd->add_option("--log", fit_options.log, "prediction log path")->required();
    cmd->add_option("--schema", fit_options.schema, "schema file (defaults built in)");
    if (with_k)
      cmd->add_option("--k", fit_options.k, "selected embedding dimensions");
    cmd->add_option("--ridge", fit_options.ridge, "ridge penalty");
    cmd->add_option("--epsilon", fit_options.epsilon, "probability clamp");
    cmd->add_option("--out", out_path, "report path")->required();
  };

  auto* audit = app.add_subcommand("audit", "fit the model and report attribute scores");
  add_fit_options(audit);
  audit->add_option("--holdout", holdout, "held-out fraction for mse reporting")
      ->check(CLI::Range(0.0, 0.5));

  auto* validate = app.add_subcommand(
      "validate", "correlate scores and group metrics against mutual information");
  add_fit_options(validate);
  validate->add_option("--bins", bins, "quantile bins for mutual information");
  validate->add_flag("--abs-waf", abs_waf, "correlate absolute scores instead of signed");

  auto* sweep = app.add_subcommand("sweep-k", "mse across embedding dimension counts");
  add_fit_options(sweep, false);
  sweep->add_option("--grid", grid, "comma-separated counts, e.g. 0,10,25");

  auto* groups = app.add_subcommand(
      "groups", "model-implied vs empirical loss across joint demographic groups");
  add_fit_options(groups);

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed())
    return run_synth(config_path, schema_path, seed, seed_opt->count() > 0, out_path);
  if (audit->parsed()) return run_audit(fit_options, holdout, out_path);
  if (validate->parsed()) return run_validate(fit_options, bins, abs_waf, out_path);
  if (sweep->parsed()) return run_sweep(fit_options, grid, out_path);
  if (groups->parsed()) return run_groups(fit_options, out_path);
  return 1;
}
