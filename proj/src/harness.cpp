#include "seagull/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "seagull/errors.hpp"

namespace seagull {

namespace {

using ojson = nlohmann::ordered_json;

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  return Rng::stream(seed, purpose).next_u64();
}

struct TrialData {
  Dataset train;
  Dataset test;
};

TrialData make_trial_data(const ExperimentConfig& config, std::uint64_t seed) {
  const TaskSpec task = config.task_spec();
  TrialData d{generate_dataset(task, config.n_train, derive_seed(seed, "train-data")),
              generate_dataset(task, config.n_test, derive_seed(seed, "test-data"))};
  if (config.noise_fraction > 0.0) {
    NoisyLabels noisy = add_label_noise(d.train.y, config.noise_fraction,
                                        derive_seed(seed, "label-noise"));
    d.train.y = std::move(noisy.y);
    d.train.noise_fraction = config.noise_fraction;
  }
  return d;
}

struct LrOutcome {
  LrResult result;
  TrainHistory history;
  double seconds = 0.0;
  std::string error;
};

LrOutcome train_one(const ExperimentConfig& config, const std::vector<LayerSpec>& specs,
                    std::uint64_t seed, double lr, const TrialData& data) {
  LrOutcome out;
  out.result.lr = lr;
  try {
    const Network net = init_network(specs, seed);
    TrainConfig tc;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.base_lr = lr;
    tc.lr_halving_period = config.lr_halving_period;
    tc.loss = config.loss;
    tc.seed = seed;
    TrainResult trained = train(net, data.train, data.test, tc, make_optimizer(config.optimizer, lr));
    const std::vector<double> pred = predict(trained.network, data.test.x);
    out.result.test_mae = loss_value(LossKind::mae, data.test.y, pred);
    out.result.test_mse = loss_value(LossKind::mse, data.test.y, pred);
    out.result.final_train_loss = trained.history.epochs.back().train_loss;
    out.result.final_test_loss = trained.history.epochs.back().test_loss;
    out.seconds = trained.history.epochs.back().seconds;
    out.history = std::move(trained.history);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
// written to slot i by fn, so the outcome does not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct ArmRuns {
  std::optional<std::size_t> layer;
  std::vector<RunReport> per_seed;
  std::vector<std::string> errors;  // per seed
};

// Trains every (arm, seed, lr) combination and folds the sweep of each
// (arm, seed) into a RunReport.
std::vector<ArmRuns> run_arms(const ExperimentConfig& config,
                              const std::vector<std::optional<std::size_t>>& arms,
                              std::size_t workers) {
  config.validate();
  std::vector<TrialData> data;
  data.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds) data.push_back(make_trial_data(config, seed));

  std::vector<std::vector<LayerSpec>> specs;
  for (const auto& layer : arms) specs.push_back(config.layer_specs(layer));

  const std::size_t n_lr = config.lr_sweep.size();
  const std::size_t n_seed = config.seeds.size();
  std::vector<LrOutcome> outcomes(arms.size() * n_seed * n_lr);
  parallel_for(outcomes.size(), workers, [&](std::size_t job) {
    const std::size_t lr_i = job % n_lr;
    const std::size_t seed_i = (job / n_lr) % n_seed;
    const std::size_t arm_i = job / (n_lr * n_seed);
    outcomes[job] = train_one(config, specs[arm_i], config.seeds[seed_i], config.lr_sweep[lr_i],
                              data[seed_i]);
  });

  std::vector<ArmRuns> out;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    ArmRuns runs;
    runs.layer = arms[a];
    for (std::size_t s = 0; s < n_seed; ++s) {
      RunReport r;
      r.seed = config.seeds[s];
      r.arm = arms[a] ? "substituted" : "baseline";
      for (const auto& spec : specs[a]) r.layer_activations.push_back(spec.activation.label());
      r.resampled_inputs = data[s].train.resample_count + data[s].test.resample_count;
      std::string error;
      bool have_best = false;
      for (std::size_t l = 0; l < n_lr; ++l) {
        LrOutcome& o = outcomes[(a * n_seed + s) * n_lr + l];
        r.wall_seconds += o.seconds;
        if (!o.error.empty()) {
          error += (error.empty() ? "" : "; ") + std::string("lr ") + format_double(o.result.lr) +
                   ": " + o.error;
          continue;
        }
        r.sweep.push_back(o.result);
        if (!have_best || o.result.final_test_loss < r.best().final_test_loss) {
          r.best_index = r.sweep.size() - 1;
          r.history = std::move(o.history);
          have_best = true;
        }
      }
      if (have_best) {
        r.test_mae = r.best().test_mae;
        r.test_mse = r.best().test_mse;
      } else {
        error = "all learning rates failed: " + error;
      }
      runs.per_seed.push_back(std::move(r));
      runs.errors.push_back(have_best ? std::string() : error);
    }
    out.push_back(std::move(runs));
  }
  return out;
}

ComparisonReport assemble(const ExperimentConfig& config, const ArmRuns& baseline,
                          const ArmRuns& substituted) {
  ComparisonReport rep;
  rep.config = config;
  rep.layer_index = substituted.layer.value_or(0);
  rep.config.substitution_layer = substituted.layer;
  rep.baseline_activation = config.baseline_activation;
  rep.substitute_activation = config.substitute_activation;
  std::vector<double> bm, sm, bs, ss;
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    TrialResult t;
    t.seed = config.seeds[s];
    const auto& b = baseline.per_seed[s];
    const auto& u = substituted.per_seed[s];
    const bool b_ok = baseline.errors[s].empty();
    const bool u_ok = substituted.errors[s].empty();
    if (b_ok) {
      t.baseline_mae = b.test_mae;
      t.baseline_mse = b.test_mse;
      t.baseline_lr = b.best().lr;
    } else {
      t.error = "baseline: " + baseline.errors[s];
    }
    if (u_ok) {
      t.substituted_mae = u.test_mae;
      t.substituted_mse = u.test_mse;
      t.substituted_lr = u.best().lr;
    } else {
      t.error += (t.error.empty() ? "" : " | ") + std::string("substituted: ") + substituted.errors[s];
    }
    if (b_ok && u_ok) {
      bm.push_back(t.baseline_mae);
      sm.push_back(t.substituted_mae);
      bs.push_back(t.baseline_mse);
      ss.push_back(t.substituted_mse);
      const double num = config.loss == LossKind::mae ? t.baseline_mae : t.baseline_mse;
      const double den = config.loss == LossKind::mae ? t.substituted_mae : t.substituted_mse;
      rep.trial_ratios.push_back(num == den ? 1.0 : num / den);
    }
    rep.trials.push_back(std::move(t));
  }
  if (bm.empty()) {
    throw Error("comparison at layer " + std::to_string(rep.layer_index) +
                ": no trial completed in both arms; first error: " + rep.trials.front().error);
  }
  rep.median_baseline_mae = median(bm);
  rep.median_substituted_mae = median(sm);
  rep.median_baseline_mse = median(bs);
  rep.median_substituted_mse = median(ss);
  const double num = config.loss == LossKind::mae ? rep.median_baseline_mae : rep.median_baseline_mse;
  const double den =
      config.loss == LossKind::mae ? rep.median_substituted_mae : rep.median_substituted_mse;
  rep.improvement_ratio = num == den ? 1.0 : num / den;
  return rep;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

template <typename T>
std::vector<T> get_vector(const nlohmann::json& j, const char* key, std::vector<T> fallback) {
  return j.contains(key) ? j.at(key).get<std::vector<T>>() : fallback;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  try {
    (void)task_spec();
    auto b = activation_from_label(baseline_activation);
    auto s = activation_from_label(substitute_activation);
    if (b.kind() == ActivationKind::identity || s.kind() == ActivationKind::identity) {
      fail("hidden activations cannot be identity");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(e.what());
  }
  if (n_train == 0) fail("n_train must be at least 1");
  if (n_test == 0) fail("n_test must be at least 1");
  if (hidden_widths.empty()) fail("at least one hidden layer is required");
  for (std::size_t w : hidden_widths)
    if (w == 0) fail("hidden widths must be positive");
  if (substitution_layer && *substitution_layer >= hidden_widths.size()) {
    fail("substitution_layer " + std::to_string(*substitution_layer) + " >= hidden layer count " +
         std::to_string(hidden_widths.size()));
  }
  for (std::size_t l : batch_norm_layers)
    if (l >= hidden_widths.size()) fail("batch_norm_layers index out of range");
  for (std::size_t l : dropout_layers)
    if (l >= hidden_widths.size()) fail("dropout_layers index out of range");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
  if (lr_sweep.empty()) fail("lr_sweep must not be empty");
  for (double lr : lr_sweep)
    if (!(lr > 0.0)) fail("learning rates must be positive");
  if (epochs == 0) fail("epochs must be at least 1");
  if (batch_size == 0) fail("batch_size must be at least 1");
  if (lr_halving_period == 0) fail("lr_halving_period must be at least 1");
  if (!(noise_fraction >= 0.0)) fail("noise_fraction must be non-negative");
  if (seeds.empty()) fail("seeds must not be empty");
}

TaskSpec ExperimentConfig::task_spec() const {
  return make_task(task, transform_from_string(transform));
}

std::vector<LayerSpec> ExperimentConfig::layer_specs(std::optional<std::size_t> layer) const {
  const TaskSpec t = task_spec();
  auto specs = mlp_specs(t.dim, hidden_widths, activation_from_label(baseline_activation),
                         first_layer_bias);
  for (std::size_t l : batch_norm_layers) specs.at(l).batch_norm = true;
  for (std::size_t l : dropout_layers) specs.at(l).dropout_rate = dropout_rate;
  if (layer) specs.at(*layer).activation = activation_from_label(substitute_activation);
  return specs;
}

ExperimentConfig with_paper_scale(ExperimentConfig c) {
  c.n_train = 10000;
  c.n_test = 2000;
  c.epochs = 500;
  c.seeds = {1, 2, 3, 4, 5};
  return c;
}

namespace {

ojson config_json(const ExperimentConfig& c) {
  ojson j;
  j["task"] = c.task;
  j["transform"] = c.transform;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["hidden_widths"] = c.hidden_widths;
  j["baseline_activation"] = c.baseline_activation;
  j["substitute_activation"] = c.substitute_activation;
  j["substitution_layer"] = c.substitution_layer ? ojson(*c.substitution_layer) : ojson(nullptr);
  j["first_layer_bias"] = c.first_layer_bias;
  j["batch_norm_layers"] = c.batch_norm_layers;
  j["dropout_layers"] = c.dropout_layers;
  j["dropout_rate"] = c.dropout_rate;
  j["loss"] = to_string(c.loss);
  j["optimizer"] = to_string(c.optimizer);
  j["lr_sweep"] = c.lr_sweep;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr_halving_period"] = c.lr_halving_period;
  j["noise_fraction"] = c.noise_fraction;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig config_from(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "task",          "transform",         "n_train",      "n_test",
      "hidden_widths", "baseline_activation", "substitute_activation", "substitution_layer",
      "first_layer_bias", "batch_norm_layers", "dropout_layers", "dropout_rate",
      "loss",          "optimizer",         "lr_sweep",     "epochs",
      "batch_size",    "lr_halving_period", "noise_fraction", "seeds",
      "output_dir"};
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("config: unknown key '" + item.key() + "'");
    }
  }
  ExperimentConfig c;
  try {
    c.task = j.value("task", c.task);
    c.transform = j.value("transform", c.transform);
    c.n_train = j.value("n_train", c.n_train);
    c.n_test = j.value("n_test", c.n_test);
    c.hidden_widths = get_vector(j, "hidden_widths", c.hidden_widths);
    c.baseline_activation = j.value("baseline_activation", c.baseline_activation);
    c.substitute_activation = j.value("substitute_activation", c.substitute_activation);
    if (j.contains("substitution_layer") && !j.at("substitution_layer").is_null()) {
      c.substitution_layer = j.at("substitution_layer").get<std::size_t>();
    }
    c.first_layer_bias = j.value("first_layer_bias", c.first_layer_bias);
    c.batch_norm_layers = get_vector(j, "batch_norm_layers", c.batch_norm_layers);
    c.dropout_layers = get_vector(j, "dropout_layers", c.dropout_layers);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.loss = loss_from_string(j.value("loss", std::string(to_string(c.loss))));
    c.optimizer = optimizer_from_string(j.value("optimizer", std::string(to_string(c.optimizer))));
    c.lr_sweep = get_vector(j, "lr_sweep", c.lr_sweep);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr_halving_period = j.value("lr_halving_period", c.lr_halving_period);
    c.noise_fraction = j.value("noise_fraction", c.noise_fraction);
    c.seeds = get_vector(j, "seeds", c.seeds);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) { return config_json(c).dump(2); }

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c = config_from(j);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return config_from_json(ss.str());
}

RunReport run_single(const ExperimentConfig& config, std::uint64_t seed, std::size_t workers) {
  ExperimentConfig one = config;
  one.seeds = {seed};
  auto runs = run_arms(one, {config.substitution_layer}, workers);
  if (!runs[0].errors[0].empty()) throw Error("run_single(seed " + std::to_string(seed) + "): " + runs[0].errors[0]);
  return std::move(runs[0].per_seed[0]);
}

std::string run_report_to_json(const RunReport& r) {
  ojson j;
  j["seed"] = r.seed;
  j["arm"] = r.arm;
  j["layer_activations"] = r.layer_activations;
  auto sweep = ojson::array();
  for (const auto& s : r.sweep) {
    sweep.push_back({{"lr", s.lr},
                     {"final_train_loss", s.final_train_loss},
                     {"final_test_loss", s.final_test_loss},
                     {"test_mae", s.test_mae},
                     {"test_mse", s.test_mse}});
  }
  j["sweep"] = sweep;
  j["best_lr"] = r.sweep.empty() ? 0.0 : r.best().lr;
  j["test_mae"] = r.test_mae;
  j["test_mse"] = r.test_mse;
  j["resampled_inputs"] = r.resampled_inputs;
  return j.dump(2);
}

ComparisonReport run_comparison(const ExperimentConfig& config, std::size_t workers) {
  config.validate();
  if (!config.substitution_layer) throw ConfigError("compare: substitution_layer is required");
  auto runs = run_arms(config, {std::nullopt, config.substitution_layer}, workers);
  return assemble(config, runs[0], runs[1]);
}

std::vector<ComparisonReport> run_layer_sweep(const ExperimentConfig& config, std::size_t workers) {
  config.validate();
  if (config.substitution_layer) {
    throw ConfigError("layer-sweep: substitution_layer must be unset; every hidden layer is tried");
  }
  std::vector<std::optional<std::size_t>> arms = {std::nullopt};
  for (std::size_t l = 0; l < config.hidden_widths.size(); ++l) arms.emplace_back(l);
  auto runs = run_arms(config, arms, workers);
  std::vector<ComparisonReport> out;
  for (std::size_t a = 1; a < runs.size(); ++a) out.push_back(assemble(config, runs[0], runs[a]));
  return out;
}

std::string comparison_report_to_json(const ComparisonReport& r) {
  ojson j;
  j["software_version"] = r.software_version;
  j["config"] = config_json(r.config);
  j["layer_index"] = r.layer_index;
  j["baseline_activation"] = r.baseline_activation;
  j["substitute_activation"] = r.substitute_activation;
  j["init_seed_policy"] = "both arms initialise from the trial seed";
  auto trials = ojson::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"seed", t.seed},
                      {"baseline_mae", t.baseline_mae},
                      {"baseline_mse", t.baseline_mse},
                      {"baseline_lr", t.baseline_lr},
                      {"substituted_mae", t.substituted_mae},
                      {"substituted_mse", t.substituted_mse},
                      {"substituted_lr", t.substituted_lr},
                      {"error", t.error}});
  }
  j["trials"] = trials;
  j["median_baseline_mae"] = r.median_baseline_mae;
  j["median_substituted_mae"] = r.median_substituted_mae;
  j["median_baseline_mse"] = r.median_baseline_mse;
  j["median_substituted_mse"] = r.median_substituted_mse;
  j["improvement_ratio"] = r.improvement_ratio;
  j["trial_ratios"] = r.trial_ratios;
  return j.dump(2) + "\n";
}

ComparisonReport comparison_report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ComparisonReport r;
  r.software_version = j.at("software_version").get<std::string>();
  r.config = config_from(j.at("config"));
  r.layer_index = j.at("layer_index").get<std::size_t>();
  r.baseline_activation = j.at("baseline_activation").get<std::string>();
  r.substitute_activation = j.at("substitute_activation").get<std::string>();
  for (const auto& t : j.at("trials")) {
    TrialResult tr;
    tr.seed = t.at("seed").get<std::uint64_t>();
    tr.baseline_mae = t.at("baseline_mae").get<double>();
    tr.baseline_mse = t.at("baseline_mse").get<double>();
    tr.baseline_lr = t.at("baseline_lr").get<double>();
    tr.substituted_mae = t.at("substituted_mae").get<double>();
    tr.substituted_mse = t.at("substituted_mse").get<double>();
    tr.substituted_lr = t.at("substituted_lr").get<double>();
    tr.error = t.at("error").get<std::string>();
    r.trials.push_back(std::move(tr));
  }
  r.median_baseline_mae = j.at("median_baseline_mae").get<double>();
  r.median_substituted_mae = j.at("median_substituted_mae").get<double>();
  r.median_baseline_mse = j.at("median_baseline_mse").get<double>();
  r.median_substituted_mse = j.at("median_substituted_mse").get<double>();
  r.improvement_ratio = j.at("improvement_ratio").get<double>();
  r.trial_ratios = j.at("trial_ratios").get<std::vector<double>>();
  return r;
}

void emit_report(const ComparisonReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  const fs::path root(dir);
  write_text(root / "summary.json", comparison_report_to_json(report));

  std::vector<TrialResult> trials = report.trials;
  std::sort(trials.begin(), trials.end(),
            [](const TrialResult& a, const TrialResult& b) { return a.seed < b.seed; });
  const std::string layer = std::to_string(report.layer_index);
  std::string csv = "seed,arm,activation,layer,lr,test_mae,test_mse,error\n";
  for (const auto& t : trials) {
    const std::string err = t.error.empty() ? "" : "failed";
    csv += std::to_string(t.seed) + ",baseline," + report.baseline_activation + "," + layer + "," +
           format_double(t.baseline_lr) + "," + format_double(t.baseline_mae) + "," +
           format_double(t.baseline_mse) + "," + err + "\n";
    csv += std::to_string(t.seed) + ",substituted," + report.substitute_activation + "," + layer +
           "," + format_double(t.substituted_lr) + "," + format_double(t.substituted_mae) + "," +
           format_double(t.substituted_mse) + "," + err + "\n";
  }
  write_text(root / "trials.csv", csv);

  std::string task = report.config.task;
  if (report.config.transform != "none") task += "+" + report.config.transform;
  std::string plot = "task,activation,arm,layer,median_mae\n";
  plot += task + "," + report.baseline_activation + ",baseline," + layer + "," +
          format_double(report.median_baseline_mae) + "\n";
  plot += task + "," + report.baseline_activation + ",substituted," + layer + "," +
          format_double(report.median_substituted_mae) + "\n";
  write_text(root / "plot.csv", plot);
}

void emit_layer_sweep(const std::vector<ComparisonReport>& reports, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  std::string csv = "layer,median_baseline_mae,median_substituted_mae,median_baseline_mse,"
                    "median_substituted_mse,improvement_ratio\n";
  for (const auto& r : reports) {
    emit_report(r, (fs::path(dir) / ("layer_" + std::to_string(r.layer_index))).string());
    csv += std::to_string(r.layer_index) + "," + format_double(r.median_baseline_mae) + "," +
           format_double(r.median_substituted_mae) + "," + format_double(r.median_baseline_mse) +
           "," + format_double(r.median_substituted_mse) + "," +
           format_double(r.improvement_ratio) + "\n";
  }
  write_text(fs::path(dir) / "sweep.csv", csv);
}

std::string render_comparison_table(const std::vector<ComparisonReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(26) << "task" << std::setw(10) << "baseline" << std::setw(16)
     << "substitute" << std::right << std::setw(14) << "base MAE" << std::setw(14) << "subst MAE"
     << std::setw(14) << "base MSE" << std::setw(14) << "subst MSE" << std::setw(9) << "ratio"
     << std::setw(7) << "wins" << '\n';
  for (const auto& r : reports) {
    std::string task = r.config.task;
    if (r.config.transform != "none") task += "+" + r.config.transform;
    if (r.config.noise_fraction > 0) task += " (noise)";
    std::size_t wins = 0;
    std::size_t complete = 0;
    for (const auto& t : r.trials) {
      if (!t.error.empty()) continue;
      ++complete;
      const bool mae = r.config.loss == LossKind::mae;
      wins += (mae ? t.substituted_mae < t.baseline_mae : t.substituted_mse < t.baseline_mse);
    }
    os << std::left << std::setw(26) << task << std::setw(10) << r.baseline_activation
       << std::setw(16) << (r.substitute_activation + "@" + std::to_string(r.layer_index))
       << std::right << std::setprecision(5) << std::setw(14) << r.median_baseline_mae
       << std::setw(14) << r.median_substituted_mae << std::setw(14) << r.median_baseline_mse
       << std::setw(14) << r.median_substituted_mse << std::setprecision(3) << std::setw(9)
       << r.improvement_ratio << std::setw(7)
       << (std::to_string(wins) + "/" + std::to_string(complete)) << '\n';
  }
  return os.str();
}

}  // namespace seagull
