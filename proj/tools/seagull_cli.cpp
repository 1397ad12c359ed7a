#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seagull/analysis.hpp"
#include "seagull/errors.hpp"
#include "seagull/harness.hpp"
#include "seagull/linalg.hpp"
#include "seagull/network.hpp"
#include "seagull/tasks.hpp"

namespace fs = std::filesystem;
using namespace seagull;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t workers = 1;
  bool paper_scale = false;
};

struct Overrides {
  std::optional<std::string> task;
  std::optional<std::string> transform;
  std::optional<std::string> baseline;
  std::optional<std::string> substitute;
  std::optional<std::size_t> layer;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_test;
  std::optional<double> noise;
  std::optional<std::string> loss;
  std::optional<std::string> optimizer;
  std::optional<std::size_t> trials;

  void attach(CLI::App* app) {
    app->add_option("--task", task, "Target task");
    app->add_option("--transform", transform, "Label transform: none, log1p, exp_over_100, sin, q");
    app->add_option("--baseline", baseline, "Baseline hidden activation");
    app->add_option("--substitute", substitute, "Activation swapped in");
    app->add_option("--layer", layer, "Hidden layer to substitute");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--n-train", n_train, "Training samples");
    app->add_option("--n-test", n_test, "Test samples");
    app->add_option("--noise", noise, "Label noise as a fraction of the label std");
    app->add_option("--loss", loss, "mae or mse");
    app->add_option("--optimizer", optimizer, "sgd, rmsprop or adam");
    app->add_option("--trials", trials, "Number of trial seeds");
  }
};

ExperimentConfig build_config(const GlobalOptions& g, const Overrides& o) {
  ExperimentConfig c = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  if (g.paper_scale) c = with_paper_scale(c);
  if (o.task) c.task = *o.task;
  if (o.transform) c.transform = *o.transform;
  if (o.baseline) c.baseline_activation = *o.baseline;
  if (o.substitute) c.substitute_activation = *o.substitute;
  if (o.layer) c.substitution_layer = *o.layer;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.n_train) c.n_train = *o.n_train;
  if (o.n_test) c.n_test = *o.n_test;
  if (o.noise) c.noise_fraction = *o.noise;
  if (o.loss) c.loss = loss_from_string(*o.loss);
  if (o.optimizer) c.optimizer = optimizer_from_string(*o.optimizer);
  if (o.trials || g.seed) {
    const std::size_t count = o.trials.value_or(c.seeds.size());
    const std::uint64_t first = g.seed.value_or(c.seeds.empty() ? 1 : c.seeds.front());
    c.seeds.clear();
    for (std::size_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
  }
  if (!g.out.empty()) c.output_dir = g.out;
  c.validate();
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_gen_data(const ExperimentConfig& c) {
  const TaskSpec task = c.task_spec();
  const std::uint64_t seed = c.seeds.front();
  Dataset train = generate_dataset(task, c.n_train, seed);
  Dataset test = generate_dataset(task, c.n_test, seed + 1);
  if (c.noise_fraction > 0.0) {
    const auto noisy = add_label_noise(train.y, c.noise_fraction, seed);
    if (noisy.constant_labels) std::cerr << "warning: constant labels, no noise added\n";
    train.y = noisy.y;
    train.noise_fraction = c.noise_fraction;
  }
  fs::create_directories(c.output_dir);
  write_dataset(train, (fs::path(c.output_dir) / "train").string());
  write_dataset(test, (fs::path(c.output_dir) / "test").string());
  std::cout << "wrote " << train.size() << " train and " << test.size() << " test samples of "
            << task.name << " to " << c.output_dir << " (resampled " << train.resample_count + test.resample_count
            << " singular inputs)\n";
  return 0;
}

int cmd_train(const ExperimentConfig& c, std::size_t workers) {
  const RunReport r = run_single(c, c.seeds.front(), workers);
  const fs::path out(c.output_dir);
  write_file(out / "run.json", run_report_to_json(r));
  write_file(out / "history.csv", r.history.to_csv(true));
  std::cout << "seed " << r.seed << "  layers";
  for (const auto& a : r.layer_activations) std::cout << ' ' << a;
  std::cout << '\n';
  for (const auto& s : r.sweep) {
    std::cout << "  lr " << std::setw(6) << s.lr << "  test MAE " << std::setw(10) << s.test_mae
              << "  test MSE " << std::setw(10) << s.test_mse << '\n';
  }
  std::cout << "best lr " << r.best().lr << "; wrote " << (out / "run.json").string() << '\n';
  return 0;
}

int cmd_compare(ExperimentConfig c, std::size_t workers) {
  if (!c.substitution_layer) c.substitution_layer = 0;
  const auto report = run_comparison(c, workers);
  emit_report(report, c.output_dir);
  std::cout << render_comparison_table({report});
  for (const auto& t : report.trials)
    if (!t.error.empty()) std::cerr << "seed " << t.seed << ": " << t.error << '\n';
  return 0;
}

int cmd_layer_sweep(ExperimentConfig c, std::size_t workers) {
  c.substitution_layer.reset();
  const auto reports = run_layer_sweep(c, workers);
  emit_layer_sweep(reports, c.output_dir);
  std::cout << render_comparison_table(reports);
  return 0;
}

struct RankOptions {
  std::string activation = "seagull";
  std::string construction = "rank1";
  std::size_t d = 9;
  std::size_t n = 100;
  std::size_t m = 20;
  std::size_t trials = 10;
};

int cmd_rank_demo(const RankOptions& o, const GlobalOptions& g) {
  const ActivationSpec act = activation_from_label(o.activation);
  const std::uint64_t seed = g.seed.value_or(1);
  std::vector<RankReport> reports;
  for (std::size_t t = 0; t < o.trials; ++t) {
    Rng rng = Rng::stream(seed, "rank-demo-x", t);
    Matrix x(o.n, o.d);
    for (double& v : x.values()) v = rng.uniform(-2.0, 2.0);
    RankReport r;
    if (o.construction == "random") {
      r = random_rank_trial(x, o.m, act, seed + t);
    } else {
      const bool stair = o.construction == "staircase";
      if (!stair && o.construction != "rank1") {
        throw ConfigError("unknown construction '" + o.construction + "'");
      }
      const HiddenWeights h = stair ? construct_relu_staircase(x, o.m, seed + t)
                                    : construct_rank1_weights(x, o.m, act, seed + t);
      r.activation = stair ? "relu" : act.label();
      r.construction = stair ? RankConstruction::relu_staircase : RankConstruction::rank1_smooth;
      r.d = o.d;
      r.n = o.n;
      r.m = o.m;
      r.achieved_rank = h.achieved_rank;
      r.tolerance = h.tolerance;
      r.draws_used = h.draws_used;
      if (act.kind() == ActivationKind::monomial && !stair) {
        r.theoretical_bound = polynomial_rank_bound(o.d, static_cast<std::size_t>(act.exponent()));
      }
    }
    reports.push_back(r);
  }
  std::cout << std::left << std::setw(7) << "trial" << std::setw(12) << "activation"
            << std::setw(16) << "construction" << std::right << std::setw(6) << "rank"
            << std::setw(6) << "m" << std::setw(8) << "bound" << std::setw(7) << "draws" << '\n';
  std::string json = "[\n";
  for (std::size_t t = 0; t < reports.size(); ++t) {
    const auto& r = reports[t];
    std::cout << std::left << std::setw(7) << t << std::setw(12) << r.activation << std::setw(16)
              << to_string(r.construction) << std::right << std::setw(6) << r.achieved_rank
              << std::setw(6) << r.m << std::setw(8)
              << (r.theoretical_bound ? std::to_string(*r.theoretical_bound) : "-") << std::setw(7)
              << r.draws_used << '\n';
    json += rank_report_to_json(r) + (t + 1 < reports.size() ? ",\n" : "\n");
  }
  json += "]\n";
  if (!g.out.empty()) write_file(fs::path(g.out) / "rank.json", json);
  return 0;
}

struct ExchangeOptions {
  std::size_t samples = 1000;
  std::size_t k = 3;
  bool bias_free_first = false;
  bool untrained = false;
};

int cmd_exchange_check(ExperimentConfig c, const ExchangeOptions& o, std::size_t workers) {
  if (o.bias_free_first) c.first_layer_bias = false;
  const std::uint64_t seed = c.seeds.front();
  const auto specs = c.layer_specs(c.substitution_layer);
  Network net = init_network(specs, seed);
  if (!o.untrained) {
    c.seeds = {seed};
    const TaskSpec task = c.task_spec();
    const Dataset train_data = generate_dataset(task, c.n_train, seed);
    const Dataset test_data = generate_dataset(task, c.n_test, seed + 1);
    TrainConfig tc;
    tc.epochs = c.epochs;
    tc.batch_size = c.batch_size;
    tc.base_lr = c.lr_sweep.front();
    tc.lr_halving_period = c.lr_halving_period;
    tc.loss = c.loss;
    tc.seed = seed;
    net = train(net, train_data, test_data, tc, make_optimizer(c.optimizer, tc.base_lr)).network;
  }
  (void)workers;
  const auto r = check_exchangeability(predict_fn(net), o.k, net.input_dim(), o.samples, seed);
  std::cout << "layers";
  for (const auto& s : specs) std::cout << ' ' << s.activation.label();
  std::cout << "\nfirst layer bias " << (specs.front().has_bias ? "on" : "off") << "; swap gap "
            << r.swap_gap << "; antisymmetric gap " << r.antisym_gap << " over " << r.samples
            << " samples\n";
  write_file(fs::path(c.output_dir) / "exchangeability.json", exchangeability_report_to_json(r));
  return 0;
}

int cmd_report(const std::vector<std::string>& paths) {
  std::vector<ComparisonReport> reports;
  for (const auto& p : paths) {
    const fs::path path(p);
    if (fs::is_directory(path)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(path))
        if (e.path().filename() == "summary.json") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      for (const auto& f : found) reports.push_back(comparison_report_from_json(read_file(f)));
    } else {
      reports.push_back(comparison_report_from_json(read_file(path)));
    }
  }
  if (reports.empty()) throw IoError("no summary.json found");
  std::cout << render_comparison_table(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activation-substitution experiments on exchangeable regression targets"};
  app.set_version_flag("--version", kSoftwareVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Base seed; trial seeds are seed, seed+1, ...");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--workers", g.workers, "Parallel training jobs")->check(CLI::PositiveNumber);
  app.add_flag("--paper-scale", g.paper_scale, "10000/2000 samples, 500 epochs, 5 seeds");

  Overrides ov;
  auto* gen = app.add_subcommand("gen-data", "Write train/test datasets as CSV plus JSON metadata");
  auto* tr = app.add_subcommand("train", "Train one network over the learning-rate sweep");
  auto* cmp = app.add_subcommand("compare", "Baseline vs. substituted activation, paired by seed");
  auto* sweep = app.add_subcommand("layer-sweep", "Compare the substitution at every hidden layer");
  for (auto* sub : {gen, tr, cmp, sweep}) ov.attach(sub);

  RankOptions ro;
  auto* rank = app.add_subcommand("rank-demo", "Rank of g(XW + 1b) for the rank constructions");
  rank->add_option("--activation", ro.activation, "Activation label, e.g. seagull, g1:1.5, pow2");
  rank->add_option("--construction", ro.construction, "rank1, staircase or random");
  rank->add_option("--d", ro.d, "Input dimension");
  rank->add_option("--n", ro.n, "Number of points");
  rank->add_option("--m", ro.m, "Hidden width");
  rank->add_option("--trials", ro.trials, "Independent trials");

  ExchangeOptions eo;
  auto* exch = app.add_subcommand("exchange-check", "Probe a network for block exchangeability");
  ov.attach(exch);
  exch->add_option("--samples", eo.samples, "Probe inputs");
  exch->add_option("--k", eo.k, "Block width of u and v");
  exch->add_flag("--bias-free-first", eo.bias_free_first, "Drop the first hidden layer bias");
  exch->add_flag("--untrained", eo.untrained, "Probe the freshly initialised network");

  std::vector<std::string> report_paths;
  auto* rep = app.add_subcommand("report", "Render summary.json files as a table");
  rep->add_option("paths", report_paths, "summary.json files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*rank) return cmd_rank_demo(ro, g);
    if (*rep) return cmd_report(report_paths);
    const ExperimentConfig c = build_config(g, ov);
    if (*gen) return cmd_gen_data(c);
    if (*tr) return cmd_train(c, g.workers);
    if (*cmp) return cmd_compare(c, g.workers);
    if (*sweep) return cmd_layer_sweep(c, g.workers);
    if (*exch) return cmd_exchange_check(c, eo, g.workers);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
