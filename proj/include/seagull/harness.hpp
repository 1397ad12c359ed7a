#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seagull/network.hpp"
#include "seagull/optim.hpp"
#include "seagull/tasks.hpp"

namespace seagull {

inline constexpr const char* kSoftwareVersion = "seagull 0.1.0";

/// Everything needed to reproduce one experiment. Serialized as JSON; see
/// configs/ for examples.
struct ExperimentConfig {
  std::string task = "triangle_area";
  std::string transform = "none";
  std::size_t n_train = 2000;
  std::size_t n_test = 500;
  std::vector<std::size_t> hidden_widths = {100, 100, 100, 100};
  std::string baseline_activation = "relu";
  /// Activation swapped in by compare / layer-sweep.
  std::string substitute_activation = "seagull";
  /// Hidden layer to substitute; required by compare, must be empty for
  /// layer-sweep.
  std::optional<std::size_t> substitution_layer;
  bool first_layer_bias = true;
  std::vector<std::size_t> batch_norm_layers;
  std::vector<std::size_t> dropout_layers;
  double dropout_rate = 0.5;
  LossKind loss = LossKind::mae;
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  std::vector<double> lr_sweep = {0.001, 0.003, 0.005};
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  std::size_t lr_halving_period = 100;
  double noise_fraction = 0.0;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string output_dir = "out";

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  TaskSpec task_spec() const;
  /// Layer specs with the baseline activation everywhere, then
  /// `substitute_activation` at `layer` if given.
  std::vector<LayerSpec> layer_specs(std::optional<std::size_t> layer) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// 10000 / 2000 samples, 500 epochs, seeds 1..5.
ExperimentConfig with_paper_scale(ExperimentConfig c);

std::string config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct LrResult {
  double lr = 0.0;
  double final_train_loss = 0.0;
  double final_test_loss = 0.0;
  double test_mae = 0.0;
  double test_mse = 0.0;
  friend bool operator==(const LrResult&, const LrResult&) = default;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::string arm;
  std::vector<std::string> layer_activations;
  std::vector<LrResult> sweep;
  std::size_t best_index = 0;
  double test_mae = 0.0;
  double test_mse = 0.0;
  TrainHistory history;  // of the selected learning rate
  double wall_seconds = 0.0;
  std::size_t resampled_inputs = 0;

  const LrResult& best() const { return sweep.at(best_index); }
};

/// Generates data for `seed`, trains one network per learning rate in the
/// sweep, and keeps the run with the lowest final test loss. The network
/// uses config.substitution_layer if set.
RunReport run_single(const ExperimentConfig& config, std::uint64_t seed, std::size_t workers = 1);

std::string run_report_to_json(const RunReport& r);

struct TrialResult {
  std::uint64_t seed = 0;
  double baseline_mae = 0.0;
  double baseline_mse = 0.0;
  double baseline_lr = 0.0;
  double substituted_mae = 0.0;
  double substituted_mse = 0.0;
  double substituted_lr = 0.0;
  /// Non-empty when either arm failed; metrics of the failed arm are 0.
  std::string error;
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct ComparisonReport {
  ExperimentConfig config;
  std::size_t layer_index = 0;
  std::string baseline_activation;
  std::string substitute_activation;
  std::vector<TrialResult> trials;
  double median_baseline_mae = 0.0;
  double median_substituted_mae = 0.0;
  double median_baseline_mse = 0.0;
  double median_substituted_mse = 0.0;
  /// median baseline / median substituted, on MAE when the training loss is
  /// MAE and on MSE otherwise. Values above 1 mean the substitution helped.
  double improvement_ratio = 1.0;
  std::vector<double> trial_ratios;
  std::string software_version = kSoftwareVersion;

  friend bool operator==(const ComparisonReport&, const ComparisonReport&) = default;
};

/// Baseline vs. substitution at config.substitution_layer, paired by seed:
/// both arms use the same data and the same initial weights.
ComparisonReport run_comparison(const ExperimentConfig& config, std::size_t workers = 1);

/// One comparison per hidden layer; the baseline arm is trained once per
/// seed and shared by every report.
std::vector<ComparisonReport> run_layer_sweep(const ExperimentConfig& config,
                                              std::size_t workers = 1);

std::string comparison_report_to_json(const ComparisonReport& r);
ComparisonReport comparison_report_from_json(const std::string& text);

/// Writes summary.json, trials.csv (one row per trial and arm) and plot.csv
/// (task, activation, arm, median_mae) into dir, creating it if needed.
void emit_report(const ComparisonReport& report, const std::string& dir);
/// Writes each report to dir/layer_<k>/ and a combined sweep.csv.
void emit_layer_sweep(const std::vector<ComparisonReport>& reports, const std::string& dir);

/// Aligned text table of one or more comparison reports.
std::string render_comparison_table(const std::vector<ComparisonReport>& reports);

double median(std::vector<double> values);

}  // namespace seagull
