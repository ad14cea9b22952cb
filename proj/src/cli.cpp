#include "facelm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "facelm/dataset.hpp"
#include "facelm/evaluate.hpp"
#include "facelm/features.hpp"
#include "facelm/forest.hpp"
#include "facelm/plots.hpp"
#include "facelm/stats.hpp"
#include "facelm/synth.hpp"

namespace facelm::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string input;
  std::string out = "out";
  std::string mode = "displacement";
  std::string outliers = "winsorize";
  std::string model = "optimized_nn";
  std::string models = "tree,forest,basic_nn,optimized_nn";
  std::string modes = "absolute,displacement";
  std::string emotion = "all";
  std::string chart = "pie";
  std::string spec;
  std::string config;
  int k = 4;
  std::uint64_t seed = 1;

  int epochs = 50;
  std::size_t batch_size = 32;
  double lr = 0.001;
  std::string schedule = "auto";
  double decay_factor = 0.5;
  int decay_every = 15;
  bool class_weighting = false;

  std::string criterion = "gini";
  int max_depth = 0;
  int min_samples_leaf = 1;
  int n_trees = 100;
  int features_per_split = 11;
  bool bootstrap = true;

  bool parallel = false;
};

void log(const std::string& msg) { std::cerr << "[facelm] " << msg << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
  log("wrote " + path.string());
}

void write_svg(const fs::path& path, const SvgDocument& doc) { write_text(path, doc.str()); }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw Error("empty list '" + text + "'");
  return out;
}

CuratedDataset load_curated(const RunConfig& rc) {
  if (rc.input.empty()) throw Error("--input is required");
  auto result = load_dataset(rc.input);
  log(fmt::format("{}: {} records accepted, {} groups rejected", rc.input,
                  result.report.accepted_count, result.report.rejected.size()));
  if (result.dataset.records.empty()) throw Error("no valid records in " + rc.input);
  return std::move(result.dataset);
}

eval::ModelConfig model_config(const RunConfig& rc, eval::ModelKind kind) {
  auto c = eval::default_config(kind);
  c.outliers = parse_policy(rc.outliers);

  c.tree.criterion = forest::parse_criterion(rc.criterion);
  if (rc.max_depth < 0) throw Error("--max-depth must be >= 0");
  if (rc.max_depth > 0) c.tree.max_depth = rc.max_depth;
  if (rc.min_samples_leaf < 1) throw Error("--min-samples-leaf must be >= 1");
  c.tree.min_samples_leaf = rc.min_samples_leaf;
  if (rc.n_trees < 1) throw Error("--n-trees must be >= 1");
  c.forest.n_trees = rc.n_trees;
  if (rc.features_per_split < 1) throw Error("--features-per-split must be >= 1");
  c.forest.features_per_split = rc.features_per_split;
  c.forest.bootstrap = rc.bootstrap;
  c.forest.tree = c.tree;

  if (rc.epochs < 1) throw Error("--epochs must be >= 1");
  c.nn.epochs = rc.epochs;
  if (rc.batch_size < 1) throw Error("--batch-size must be >= 1");
  c.nn.batch_size = rc.batch_size;
  if (!(rc.lr > 0.0)) throw Error("--lr must be positive");
  c.nn.schedule.base = rc.lr;
  c.nn.schedule.factor = rc.decay_factor;
  if (rc.decay_every < 1) throw Error("--decay-every must be >= 1");
  c.nn.schedule.step_epochs = rc.decay_every;
  if (rc.schedule == "constant") {
    c.nn.schedule.kind = nn::LrSchedule::Kind::Constant;
  } else if (rc.schedule == "step") {
    c.nn.schedule.kind = nn::LrSchedule::Kind::StepDecay;
  } else if (rc.schedule != "auto") {
    throw Error("unknown schedule '" + rc.schedule + "'");
  }
  c.class_weighting = rc.class_weighting;
  return c;
}

std::vector<Emotion> selected_emotions(const RunConfig& rc, const CuratedDataset& ds) {
  if (rc.emotion != "all") return {parse_emotion(rc.emotion)};
  const auto dist = class_distribution(ds);
  std::vector<Emotion> out;
  for (auto e : kAllEmotions) {
    if (dist.counts[label_index(e)] >= 2) out.push_back(e);
  }
  return out;
}

std::string history_csv(const nn::TrainingHistory& h) {
  std::ostringstream os;
  nn::write_history_csv(h, os);
  return os.str();
}

// ---- commands ----

int cmd_validate(const RunConfig& rc) {
  if (rc.input.empty()) throw Error("--input is required");
  const auto result = load_dataset(rc.input);
  const auto text = to_json(result.report).dump(2) + "\n";
  write_text(fs::path(rc.out) / "validation_report.json", text);
  std::cout << text;
  return 0;
}

int cmd_features(const RunConfig& rc) {
  const auto ds = load_curated(rc);
  const auto mode = parse_mode(rc.mode);
  const auto fm = build_feature_matrix(ds, mode);
  std::ostringstream os;
  write_feature_csv(fm, os);
  write_text(fs::path(rc.out) / fmt::format("features_{}.csv", mode_name(mode)), os.str());
  return 0;
}

int cmd_stats(const RunConfig& rc) {
  const auto ds = load_curated(rc);
  const auto mode = parse_mode(rc.mode);
  std::vector<LandmarkStatsTable> tables;
  nlohmann::json j = nlohmann::json::object();
  for (auto e : selected_emotions(rc, ds)) {
    tables.push_back(emotion_landmark_stats(ds, e, mode));
    j[std::string(emotion_name(e))] = to_json(tables.back());
  }
  if (tables.empty()) throw Error("no emotion has the 2 samples needed for statistics");
  const auto text = j.dump(2) + "\n";
  write_text(fs::path(rc.out) / fmt::format("stats_{}.json", mode_name(mode)), text);
  std::ostringstream csv;
  write_stats_csv(tables, csv);
  write_text(fs::path(rc.out) / fmt::format("stats_{}.csv", mode_name(mode)), csv.str());
  std::cout << text;
  return 0;
}

int cmd_plot(const RunConfig& rc) {
  const auto ds = load_curated(rc);
  const auto mode = parse_mode(rc.mode);
  for (auto e : selected_emotions(rc, ds)) {
    const auto table = emotion_landmark_stats(ds, e, mode);
    const auto points = collect_landmark_positions(ds, e, mode);
    write_svg(fs::path(rc.out) / boxplot_file_name(e, mode), render_landmark_boxplot(table, points));
  }
  const auto chart = rc.chart == "bar" ? DistributionChart::Bar : DistributionChart::Pie;
  if (rc.chart != "bar" && rc.chart != "pie") throw Error("unknown chart '" + rc.chart + "'");
  write_svg(fs::path(rc.out) / "class_distribution.svg",
            render_distribution(class_distribution(ds), chart));
  return 0;
}

int cmd_train(const RunConfig& rc) {
  const auto ds = load_curated(rc);
  const auto mode = parse_mode(rc.mode);
  const auto kind = eval::parse_model(rc.model);
  const auto config = model_config(rc, kind);
  const auto fm = build_feature_matrix(ds, mode);

  // Hold out fold 0 of the stratified split.
  const auto folds = eval::stratified_kfold(fm.labels, rc.k, rc.seed);
  const auto tr = folds.train_indices(0);
  const auto te = folds.test_indices(0);
  std::vector<int> ytr, yte;
  for (auto i : tr) ytr.push_back(fm.labels[i]);
  for (auto i : te) yte.push_back(fm.labels[i]);
  auto split =
      eval::apply_outlier_policy(fm.X.select_rows(tr), ytr, fm.X.select_rows(te), config.outliers);

  const fs::path out(rc.out);
  const auto name = std::string(eval::model_name(kind));
  nlohmann::json checkpoint;
  std::vector<int> predictions;
  switch (kind) {
    case eval::ModelKind::Tree: {
      auto params = config.tree;
      params.rng_seed = rc.seed;
      const auto tree = forest::fit_tree(split.X_train, split.y_train, params);
      for (std::size_t i = 0; i < split.X_test.rows(); ++i) {
        predictions.push_back(tree.predict(split.X_test.row(i)).label);
      }
      checkpoint = forest::to_json(tree);
      checkpoint["params"] = forest::to_json(params);
      break;
    }
    case eval::ModelKind::Forest: {
      auto params = config.forest;
      params.rng_seed = rc.seed;
      const auto rf = forest::fit_forest(split.X_train, split.y_train, params);
      for (std::size_t i = 0; i < split.X_test.rows(); ++i) {
        predictions.push_back(rf.predict(split.X_test.row(i)));
      }
      checkpoint = forest::to_json(rf);
      break;
    }
    case eval::ModelKind::BasicNn:
    case eval::ModelKind::OptimizedNn: {
      auto tc = config.nn;
      tc.seed = rc.seed;
      tc.batch_size = std::min(tc.batch_size, split.X_train.rows());
      if (config.class_weighting) tc.class_weights = nn::inverse_frequency_weights(split.y_train);
      auto result = nn::train(eval::make_network(kind, split.X_train.cols(), rc.seed),
                              split.X_train, split.y_train, split.X_test, yte, tc);
      for (std::size_t ep = 0; ep < result.history.epochs.size(); ++ep) {
        const auto& e = result.history.epochs[ep];
        log(fmt::format("epoch {:3d} lr {:.6f} train loss {:.4f} acc {:.4f} | test loss {:.4f} "
                        "acc {:.4f}",
                        ep + 1, e.learning_rate, e.train_loss, e.train_accuracy, e.test_loss,
                        e.test_accuracy));
      }
      predictions = nn::predict_labels(result.model, split.X_test);
      checkpoint = result.model.to_json();
      write_text(out / fmt::format("history_{}.csv", name), history_csv(result.history));
      write_svg(out / fmt::format("curves_{}.svg", name),
                render_learning_curves(result.history, name));
      break;
    }
  }
  checkpoint["train_config"] = eval::to_json(config, kind);
  checkpoint["train_config"]["seed"] = rc.seed;
  checkpoint["train_config"]["feature_mode"] = mode_name(mode);
  write_text(out / fmt::format("model_{}.json", name), checkpoint.dump(2) + "\n");
  log(fmt::format("{} held-out accuracy {:.4f} ({} test samples)", name,
                  eval::accuracy(predictions, yte), yte.size()));
  return 0;
}

eval::CvReport run_cv(const RunConfig& rc, const FeatureMatrix& fm, FeatureMode mode,
                      eval::ModelKind kind) {
  log(fmt::format("cross-validating {} on {} features (k = {}, seed = {})", eval::model_name(kind),
                  mode_name(mode), rc.k, rc.seed));
  auto report =
      eval::cross_validate(kind, model_config(rc, kind), fm.X, fm.labels, rc.k, rc.seed, rc.parallel);
  report.mode = mode;
  for (std::size_t f = 0; f < report.fold_accuracies.size(); ++f) {
    log(fmt::format("  fold {} accuracy {:.4f}", f, report.fold_accuracies[f]));
  }
  log(fmt::format("  mean accuracy {:.4f}", report.mean_accuracy));
  const fs::path out(rc.out);
  write_text(out / fmt::format("cv_{}_{}.json", report.model, mode_name(mode)),
             eval::to_json(report).dump(2) + "\n");
  if (!report.histories.empty()) {
    const auto mean = nn::mean_history(report.histories);
    write_text(out / fmt::format("history_{}_{}.csv", report.model, mode_name(mode)),
               history_csv(mean));
  }
  return report;
}

void write_curves(const RunConfig& rc, const eval::CvReport& report) {
  if (report.histories.empty()) return;
  write_svg(fs::path(rc.out) / fmt::format("curves_{}.svg", report.model),
            render_learning_curves(nn::mean_history(report.histories),
                                   fmt::format("{} ({}, mean of {} folds)", report.model,
                                               mode_name(report.mode), report.k)));
}

int cmd_cv(const RunConfig& rc) {
  const auto ds = load_curated(rc);
  const auto mode = parse_mode(rc.mode);
  const auto fm = build_feature_matrix(ds, mode);
  const auto report = run_cv(rc, fm, mode, eval::parse_model(rc.model));
  write_curves(rc, report);
  return 0;
}

int cmd_compare(const RunConfig& rc) {
  const auto ds = load_curated(rc);
  std::vector<FeatureMode> modes;
  for (const auto& m : split_list(rc.modes)) modes.push_back(parse_mode(m));
  std::vector<eval::ModelKind> kinds;
  for (const auto& m : split_list(rc.models)) kinds.push_back(eval::parse_model(m));

  std::vector<eval::CvReport> reports;
  for (auto mode : modes) {
    const auto fm = build_feature_matrix(ds, mode);
    for (auto kind : kinds) reports.push_back(run_cv(rc, fm, mode, kind));
  }
  // Learning curves come from the last listed feature mode.
  for (const auto& r : reports) {
    if (r.mode == modes.back()) write_curves(rc, r);
  }
  write_text(fs::path(rc.out) / "comparison.md", eval::comparison_markdown(reports));
  return 0;
}

int cmd_synth(const RunConfig& rc, bool seed_given) {
  synth::SynthSpec spec;
  if (rc.spec.empty()) {
    spec = synth::separable7_spec(rc.seed);
  } else {
    std::ifstream f(rc.spec);
    if (!f) throw Error("cannot open spec " + rc.spec);
    spec = synth::spec_from_json(nlohmann::json::parse(f));
    if (seed_given) spec.seed = rc.seed;
  }
  const auto ds = synth::generate(spec);
  std::ostringstream os;
  write_dataset_csv(ds, os);
  write_text(rc.out, os.str());
  log(fmt::format("generated {} records (seed {}, sigma {})", ds.records.size(), spec.seed,
                  spec.sigma));
  return 0;
}

// ---- option wiring ----

void add_config(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--config", rc.config,
                  "JSON file of option values (keys are option names); explicit flags win");
}

void add_input(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--input,-i", rc.input, "Landmark CSV file");
}

void add_out_dir(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--out,-o", rc.out, "Output directory");
}

void add_mode(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--mode", rc.mode, "Feature mode: absolute | displacement");
}

void add_emotion(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--emotion", rc.emotion, "Emotion to analyse, or 'all'");
}

void add_seed(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--seed", rc.seed, "Master random seed");
}

void add_model_options(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--k", rc.k, "Number of stratified folds");
  add_seed(sub, rc);
  sub->add_option("--outliers", rc.outliers,
                  "Outlier policy fitted on each training split: none | winsorize | drop");
  sub->add_option("--epochs", rc.epochs, "Neural network training epochs");
  sub->add_option("--batch-size", rc.batch_size, "Minibatch size");
  sub->add_option("--lr", rc.lr, "Base learning rate");
  sub->add_option("--schedule", rc.schedule,
                  "Learning-rate schedule: auto (constant for basic_nn, step for optimized_nn) | "
                  "constant | step");
  sub->add_option("--decay-factor", rc.decay_factor, "Step-decay multiplier");
  sub->add_option("--decay-every", rc.decay_every, "Epochs between learning-rate decays");
  sub->add_flag("--class-weighting", rc.class_weighting,
                "Weight the loss by inverse class frequency");
  sub->add_option("--criterion", rc.criterion, "Tree split criterion: gini | entropy");
  sub->add_option("--max-depth", rc.max_depth, "Maximum tree depth (0 = unlimited)");
  sub->add_option("--min-samples-leaf", rc.min_samples_leaf, "Minimum samples per leaf");
  sub->add_option("--n-trees", rc.n_trees, "Trees in the random forest");
  sub->add_option("--features-per-split", rc.features_per_split,
                  "Features tried per forest split");
  sub->add_option("--bootstrap", rc.bootstrap, "Bootstrap-sample each forest tree (true | false)");
}

std::string json_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_decimal(v.get<double>());
  throw Error("config key '" + key + "' must be a string, number or boolean");
}

// Fills options the command line left unset from the --config file.
void merge_config(CLI::App* sub, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw Error("config " + path + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = name == "config" ? nullptr : sub->get_option_no_throw("--" + name);
    if (opt == nullptr) {
      throw Error(fmt::format("unknown config key '{}' for command '{}'", key, sub->get_name()));
    }
    if (opt->count() > 0) continue;
    opt->clear();
    opt->add_result(json_scalar(value, key));
    opt->run_callback();
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  RunConfig rc;
  CLI::App app{"Facial landmark emotion analysis: curation, statistics, plots and classifiers",
               "facelm"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Validate a landmark CSV and report rejections");
  add_input(validate, rc);
  add_out_dir(validate, rc);
  add_config(validate, rc);

  auto* features = app.add_subcommand("features", "Export the feature matrix as CSV");
  add_input(features, rc);
  add_mode(features, rc);
  add_out_dir(features, rc);
  add_config(features, rc);

  auto* stats = app.add_subcommand("stats", "Per-emotion landmark quartile statistics");
  add_input(stats, rc);
  add_mode(stats, rc);
  add_emotion(stats, rc);
  add_out_dir(stats, rc);
  add_config(stats, rc);

  auto* plot = app.add_subcommand("plot", "Landmark boxplots and the class distribution chart");
  add_input(plot, rc);
  add_mode(plot, rc);
  add_emotion(plot, rc);
  plot->add_option("--chart", rc.chart, "Class distribution chart: pie | bar");
  add_out_dir(plot, rc);
  add_config(plot, rc);

  auto* train = app.add_subcommand("train", "Train one model, holding out the first fold");
  add_input(train, rc);
  add_mode(train, rc);
  train->add_option("--model", rc.model, "tree | forest | basic_nn | optimized_nn");
  add_model_options(train, rc);
  add_out_dir(train, rc);
  add_config(train, rc);

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation of one model");
  add_input(cv, rc);
  add_mode(cv, rc);
  cv->add_option("--model", rc.model, "tree | forest | basic_nn | optimized_nn");
  add_model_options(cv, rc);
  cv->add_flag("--parallel", rc.parallel, "Run folds on separate threads");
  add_out_dir(cv, rc);
  add_config(cv, rc);

  auto* compare = app.add_subcommand("compare", "Cross-validate every model on every feature mode");
  add_input(compare, rc);
  compare->add_option("--models", rc.models, "Comma-separated models");
  compare->add_option("--modes", rc.modes, "Comma-separated feature modes");
  add_model_options(compare, rc);
  compare->add_flag("--parallel", rc.parallel, "Run folds on separate threads");
  add_out_dir(compare, rc);
  add_config(compare, rc);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic landmark CSV");
  synth_cmd->add_option("--spec", rc.spec,
                        "JSON generator spec; the separable-7 preset when omitted");
  add_seed(synth_cmd, rc);
  auto* synth_out = synth_cmd->add_option("--out,-o", rc.out, "Output CSV file");
  synth_out->default_str("synth.csv");
  add_config(synth_cmd, rc);

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!rc.config.empty()) merge_config(sub, rc.config);
    const auto name = sub->get_name();
    if (name == "validate") return cmd_validate(rc);
    if (name == "features") return cmd_features(rc);
    if (name == "stats") return cmd_stats(rc);
    if (name == "plot") return cmd_plot(rc);
    if (name == "train") return cmd_train(rc);
    if (name == "cv") return cmd_cv(rc);
    if (name == "compare") return cmd_compare(rc);
    if (name == "synth") {
      if (synth_out->count() == 0) rc.out = "synth.csv";
      return cmd_synth(rc, sub->get_option("--seed")->count() > 0);
    }
    throw Error("unknown command " + name);
  } catch (const std::exception& e) {
    std::cerr << "facelm: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace facelm::cli
