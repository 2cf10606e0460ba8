#include "cli.hpp"

#include "svg_plot.hpp"

#include "impgraph/dataset_io.hpp"
#include "impgraph/error.hpp"
#include "impgraph/gradcheck.hpp"
#include "impgraph/model.hpp"
#include "impgraph/parallel.hpp"
#include "impgraph/synthetic.hpp"
#include "impgraph/training.hpp"
#include "impgraph/weights_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace impgraph::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Common {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  int threads = 0;

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    cfg.validate();
    return cfg;
  }
  int thread_count() const { return threads > 0 ? threads : threads_from_env(); }
};

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

void add_common(CLI::App* app, Common& common) {
  app->add_option("--config", common.config_path, "flat key = value config file")
      ->check(CLI::ExistingFile);
  app->add_option("--threads", common.threads,
                  "worker threads (default: IMPGRAPH_THREADS or 1)");
  app->add_option_function<std::vector<std::string>>(
         "--set",
         [&common](const std::vector<std::string>& items) {
           for (const auto& item : items) {
             const auto eq = item.find('=');
             if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
             common.overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
           }
         },
         "override any config key (key=value)")
      ->group("Config keys");
  const RunConfig defaults;
  for (const std::string& key : RunConfig::keys()) {
    const std::string current = defaults.get(key);
    const std::string help = RunConfig::describe(key) + " (default " + current + ")";
    if (current == "true" || current == "false") {
      app->add_flag_function(
             flag_name(key),
             [&common, key](std::int64_t n) {
               common.overrides.emplace_back(key, n > 0 ? "true" : "false");
             },
             help)
          ->group("Config keys");
    } else {
      app->add_option_function<std::string>(
             flag_name(key),
             [&common, key](const std::string& v) { common.overrides.emplace_back(key, v); },
             help)
          ->group("Config keys");
    }
  }
}

void check_dataset_dims(const std::vector<Scene>& scenes, const ModelConfig& model) {
  for (const Scene& s : scenes) {
    const GridDims& d = model.dims;
    if (s.grid.frames != d.frames || s.grid.height != d.height || s.grid.width != d.width ||
        s.grid.channels != d.channels ||
        s.test_proposals.size() != static_cast<std::size_t>(d.n_proposals)) {
      std::ostringstream msg;
      msg << "dataset scene dims (T=" << s.grid.frames << " H=" << s.grid.height
          << " W=" << s.grid.width << " C=" << s.grid.channels
          << " N=" << s.test_proposals.size() << ") do not match the model config ("
          << model.canonical() << ")";
      fail(ErrorKind::kMismatch, msg.str());
    }
  }
}

std::string fold_weights_path(const std::string& prefix, int fold) {
  return prefix + ".fold" + std::to_string(fold) + ".bin";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorKind::kIo, "failed while writing " + path);
}

std::vector<ordered_json> read_json_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  std::vector<ordered_json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kIo, path + ": malformed record: " + e.what());
    }
  }
  return out;
}

ordered_json epoch_record(const EpochLog& e) {
  ordered_json rec;
  rec["type"] = "epoch";
  rec["fold"] = e.fold;
  rec["epoch"] = e.epoch;
  rec["loss"] = e.mean_loss;
  rec["steps"] = e.steps;
  rec["edge_row_sum"] = e.edge_row_sum;
  return rec;
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const Common& common, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  const RunConfig cfg = common.resolve();
  if (cfg.scene.scenes % 3 != 0) {
    err << "warning: " << cfg.scene.scenes
        << " scenes is not divisible by 3; splits will be near-balanced\n";
  }
  const auto scenes =
      generate_dataset(cfg.model.dims, cfg.scene, cfg.train.seed, common.thread_count());
  write_dataset(out_path, scenes);
  const DatasetStats st = dataset_stats(scenes);
  out << "wrote " << st.scenes << " scenes to " << out_path << "\n"
      << "split sizes: " << st.per_split[0] << " / " << st.per_split[1] << " / "
      << st.per_split[2] << "\n"
      << "objects: " << st.objects << ", positives: " << st.positives << " ("
      << std::setprecision(3) << st.positives_per_scene() << " per scene, positive rate "
      << (st.objects ? double(st.positives) / st.objects : 0.0) << ")\n"
      << "all-negative scenes: " << st.all_negative_scenes
      << ", missed detections: " << st.missed_detections << "\n";
  return kOk;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const Common& common, bool use_run_config, const std::string& corrupt,
                  std::ostream& out) {
  ModelConfig model = gradcheck_config();
  std::uint64_t seed = 0;
  if (use_run_config || !common.config_path.empty() || !common.overrides.empty()) {
    const RunConfig cfg = common.resolve();
    seed = cfg.train.seed;
    if (use_run_config) model = cfg.model;
  }
  GradCheckOptions opts;
  if (!corrupt.empty()) {
    opts.corrupt_param = corrupt;
    opts.corrupt_factor = 2.0;
  }
  const GradCheckReport report = gradient_check(model, seed, opts);
  out << "config: " << model.canonical() << ", seed " << seed << "\n" << report.to_text();
  return report.passed ? kOk : kNumericalFailure;
}

// ---------------------------------------------------------------- train

int cmd_train(const Common& common, const std::string& data_path, const std::string& prefix,
              bool single, std::string log_path, std::ostream& out) {
  const RunConfig cfg = common.resolve();
  const auto scenes = read_dataset(data_path);
  check_dataset_dims(scenes, cfg.model);
  if (log_path.empty()) log_path = prefix + ".log.jsonl";
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) fail(ErrorKind::kIo, "cannot write training log " + log_path);

  auto on_epoch = [&](const EpochLog& e) {
    log << epoch_record(e).dump() << "\n";
    out << "fold " << e.fold << " epoch " << e.epoch << " loss " << std::setprecision(6)
        << e.mean_loss << " edge_row_sum " << e.edge_row_sum << "\n";
  };

  if (single) {
    TrainResult r = train_model(cfg.model, cfg.train, scenes, 0, common.thread_count(), on_epoch);
    const std::string path = prefix + ".bin";
    write_weights(path, r.params);
    out << "wrote " << path << "\n";
    return kOk;
  }
  for (int fold = 1; fold <= 3; ++fold) {
    const auto train_scenes = scenes_outside_split(scenes, fold);
    if (train_scenes.empty()) fail(ErrorKind::kUsage, "no training scenes for fold " + std::to_string(fold));
    TrainResult r =
        train_model(cfg.model, cfg.train, train_scenes, fold, common.thread_count(), on_epoch);
    const std::string path = fold_weights_path(prefix, fold);
    write_weights(path, r.params);
    out << "wrote " << path << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const Common& common, const std::string& weights, const std::string& data_path,
             bool oracle, const std::string& metrics_path, const std::string& name,
             std::ostream& out, std::ostream& err) {
  const auto scenes = read_dataset(data_path);
  const int threads = common.thread_count();

  std::array<ModelParams, 3> params;
  bool folded = false;
  if (!oracle) {
    if (weights.empty()) fail(ErrorKind::kUsage, "eval needs --weights or --oracle");
    folded = fs::exists(fold_weights_path(weights, 1));
    for (int k = 0; k < 3; ++k) {
      params[static_cast<std::size_t>(k)] =
          read_weights(folded ? fold_weights_path(weights, k + 1) : weights);
      check_dataset_dims(scenes, params[static_cast<std::size_t>(k)].config);
    }
  }

  ApReport report = evaluate_splits(
      scenes,
      [&](int fold, std::span<const Scene>) -> Scorer {
        if (oracle) return oracle_scorer();
        return model_scorer(params[static_cast<std::size_t>(fold - 1)]);
      },
      threads);

  for (const auto& f : report.folds) {
    if (f.no_ground_truth) err << "warning: split " << f.fold << " has no ground truth; AP = 0\n";
  }
  const std::string label = oracle ? "oracle" : name;
  const std::string records = report.to_records(label);
  out << records << report.to_table(label);
  if (!metrics_path.empty()) {
    std::string text = records;
    for (const auto& f : report.folds) {
      ordered_json pr;
      pr["type"] = "pr_curve";
      pr["fold"] = f.fold;
      std::vector<double> recall;
      std::vector<double> precision;
      for (const auto& p : f.curve) {
        recall.push_back(p.recall);
        precision.push_back(p.precision);
      }
      pr["recall"] = recall;
      pr["precision"] = precision;
      text += pr.dump() + "\n";
    }
    write_text(metrics_path, text);
  }
  return kOk;
}

// ---------------------------------------------------------------- infer

int cmd_infer(const std::string& weights, const std::string& data_path, int index,
              const std::string& out_path, std::ostream& out) {
  const ModelParams params = read_weights(weights);
  const auto scenes = read_dataset(data_path);
  if (index < 0 || static_cast<std::size_t>(index) >= scenes.size()) {
    fail(ErrorKind::kUsage, "scene index " + std::to_string(index) + " out of range (file has " +
                                std::to_string(scenes.size()) + " scenes)");
  }
  const Scene& scene = scenes[static_cast<std::size_t>(index)];
  check_dataset_dims({scene}, params.config);
  const ForwardResult fwd = forward(scene.grid, scene.test_proposals, params);

  ordered_json doc;
  doc["scene"] = index;
  doc["n"] = fwd.scores.size();
  std::vector<double> scores(fwd.scores.data(), fwd.scores.data() + fwd.scores.size());
  doc["scores"] = scores;
  ordered_json boxes = ordered_json::array();
  for (const auto& p : scene.test_proposals) {
    boxes.push_back({{"box", {p.box.x1, p.box.y1, p.box.x2, p.box.y2}}, {"dummy", p.is_dummy}});
  }
  doc["proposals"] = boxes;
  ordered_json edges = ordered_json::array();
  for (Eigen::Index i = 0; i < fwd.edges.rows(); ++i) {
    std::vector<double> row(fwd.edges.cols());
    for (Eigen::Index j = 0; j < fwd.edges.cols(); ++j) row[static_cast<std::size_t>(j)] = fwd.edges(i, j);
    edges.push_back(row);
  }
  doc["edges"] = edges;
  const std::string text = doc.dump() + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
    out << "wrote " << out_path << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- plot

int cmd_plot(const std::string& log_path, const std::string& metrics_path,
             const std::string& edges_path, const std::string& out_dir, std::ostream& out) {
  if (log_path.empty() && metrics_path.empty() && edges_path.empty()) {
    fail(ErrorKind::kUsage, "plot needs at least one of --log, --metrics, --edges");
  }
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  if (!log_path.empty()) {
    std::map<int, plot::Series> by_fold;
    for (const auto& rec : read_json_lines(log_path)) {
      if (rec.value("type", "") != "epoch") continue;
      const int fold = rec.at("fold").get<int>();
      auto& s = by_fold[fold];
      s.label = "fold " + std::to_string(fold);
      s.x.push_back(rec.at("epoch").get<double>());
      s.y.push_back(rec.at("loss").get<double>());
    }
    if (by_fold.empty()) fail(ErrorKind::kUsage, log_path + ": no epoch records to plot");
    std::vector<plot::Series> series;
    for (auto& [_, s] : by_fold) series.push_back(std::move(s));
    const std::string path = (fs::path(out_dir) / "loss.svg").string();
    write_text(path, plot::line_chart("Training loss", "epoch", "mined loss", series));
    written.push_back(path);
  }

  if (!metrics_path.empty()) {
    int curves = 0;
    for (const auto& rec : read_json_lines(metrics_path)) {
      if (rec.value("type", "") != "pr_curve") continue;
      const int fold = rec.at("fold").get<int>();
      plot::Series s{"fold " + std::to_string(fold), rec.at("recall").get<std::vector<double>>(),
                     rec.at("precision").get<std::vector<double>>()};
      const std::string path = (fs::path(out_dir) / ("pr_fold" + std::to_string(fold) + ".svg")).string();
      write_text(path, plot::line_chart("Precision / recall, fold " + std::to_string(fold),
                                        "recall", "precision", {s}, true));
      written.push_back(path);
      ++curves;
    }
    if (curves == 0) fail(ErrorKind::kUsage, metrics_path + ": no pr_curve records to plot");
  }

  if (!edges_path.empty()) {
    const auto recs = read_json_lines(edges_path);
    if (recs.empty() || !recs.front().contains("edges")) {
      fail(ErrorKind::kUsage, edges_path + ": no edge matrix found");
    }
    const auto rows = recs.front().at("edges").get<std::vector<std::vector<double>>>();
    if (rows.empty()) fail(ErrorKind::kUsage, edges_path + ": edge matrix is empty");
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    const std::string path = (fs::path(out_dir) / "edges.svg").string();
    write_text(path, plot::heatmap("Edge matrix", flat, static_cast<int>(rows.size()),
                                   static_cast<int>(rows.front().size())));
    written.push_back(path);
  }

  for (const auto& p : written) out << "wrote " << p << "\n";
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kUsageError;
    case ErrorKind::kMismatch: return kDataMismatch;
    case ErrorKind::kIo: return kDataMismatch;
    case ErrorKind::kNumerical: return kNumericalFailure;
  }
  return kUsageError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Object importance estimation with a learned interaction graph"};
  app.require_subcommand(1);

  Common common;
  std::string data_path;
  std::string out_path;
  std::string weights;
  std::string log_path;
  std::string metrics_path;
  std::string edges_path;
  std::string corrupt;
  std::string name = "model";
  bool single = false;
  bool oracle = false;
  bool use_run_config = false;
  int index = 0;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic scene dataset");
  add_common(gen, common);
  gen->add_option("--out", out_path, "dataset file to write")->required();

  auto* grad = app.add_subcommand("gradcheck", "compare analytic and numerical gradients");
  add_common(grad, common);
  grad->add_flag("--use-config", use_run_config, "check the run config instead of the small one");
  grad->add_option("--corrupt", corrupt, "testing hook: double this array's analytic gradient");

  auto* train = app.add_subcommand("train", "train one model per fold (or one on everything)");
  add_common(train, common);
  train->add_option("--data", data_path, "dataset file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "weights prefix (writes PREFIX.foldK.bin)")->required();
  train->add_flag("--single", single, "train on all scenes, write PREFIX.bin");
  train->add_option("--log", log_path, "training log (JSON lines, default PREFIX.log.jsonl)");

  auto* eval = app.add_subcommand("eval", "11-point AP per split and averaged");
  add_common(eval, common);
  eval->add_option("--weights", weights, "weights file or fold prefix");
  eval->add_option("--data", data_path, "dataset file")->required()->check(CLI::ExistingFile);
  eval->add_flag("--oracle", oracle, "score each proposal by its label");
  eval->add_option("--metrics", metrics_path, "also write records and PR curves here");
  eval->add_option("--name", name, "model name for the table and records");

  auto* infer = app.add_subcommand("infer", "per-proposal scores and the edge matrix");
  add_common(infer, common);
  infer->add_option("--weights", weights, "weights file")->required()->check(CLI::ExistingFile);
  infer->add_option("--data", data_path, "dataset file holding the scene")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--index", index, "scene index in the file");
  infer->add_option("--out", out_path, "write JSON here instead of stdout");

  auto* plot_cmd = app.add_subcommand("plot", "render SVG plots from logs and metrics");
  plot_cmd->add_option("--log", log_path, "training log");
  plot_cmd->add_option("--metrics", metrics_path, "eval metrics file");
  plot_cmd->add_option("--edges", edges_path, "infer output");
  plot_cmd->add_option("--out-dir", out_path, "output directory")->required();

  std::vector<std::string> argv_storage{"impgraph"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*gen) return cmd_gen_data(common, out_path, out, err);
    if (*grad) return cmd_gradcheck(common, use_run_config, corrupt, out);
    if (*train) return cmd_train(common, data_path, out_path, single, log_path, out);
    if (*eval) return cmd_eval(common, weights, data_path, oracle, metrics_path, name, out, err);
    if (*infer) return cmd_infer(weights, data_path, index, out_path, out);
    if (*plot_cmd) return cmd_plot(log_path, metrics_path, edges_path, out_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace impgraph::cli
