#include "bgnn/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bgnn/analysis.hpp"
#include "bgnn/checkpoint.hpp"
#include "bgnn/diagnostics.hpp"
#include "bgnn/error.hpp"
#include "bgnn/serialize.hpp"
#include "bgnn/synthetic.hpp"
#include "bgnn/trainer.hpp"

namespace bgnn {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

fs::path resolve_dataset(const std::string& spec) {
  if (fs::is_directory(spec)) return spec;
  std::string looked = spec;
  if (const char* root = std::getenv("BGNN_DATA_ROOT"); root && *root) {
    const fs::path candidate = fs::path(root) / spec;
    if (fs::is_directory(candidate)) return candidate;
    looked += ", " + candidate.string();
  }
  throw DataError("dataset '" + spec + "' not found (looked in " + looked +
                  "; set BGNN_DATA_ROOT or pass a directory)");
}

namespace {

// Comma-separated reals; the empty string is the empty list.
std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + item + "'");
    }
  }
  return values;
}

struct ModelFlags {
  std::string config_file;
  std::string model = "bgcn-t";
  std::size_t layers = 2;
  std::size_t hidden = 0;
  double alpha = 0.0;
  std::string beta;
  double dropout = 0.5;
  double weight_decay = 5e-4;
  double learning_rate = 0.01;
  std::size_t epochs = 2000;
  std::size_t patience = 100;
  std::uint64_t seed = 0;
  bool share_weights = false;
  std::string hop_mode = "exact";
  std::map<std::string, CLI::Option*> given;

  void attach(CLI::App* app) {
    given["config"] = app->add_option("--config", config_file, "JSON model config; flags override it")
                          ->check(CLI::ExistingFile);
    given["model"] = app->add_option("--model", model, "gcn, gat, bgcn-a, bgcn-t, bgat-a, bgat-t");
    given["layers"] = app->add_option("--layers", layers, "Depth K")->check(CLI::PositiveNumber);
    given["hidden"] = app->add_option("--hidden", hidden, "Hidden width (default 16 GCN / 8 GAT)");
    given["alpha"] = app->add_option("--alpha", alpha, "Bilinear trade-off in [0,1]");
    given["beta"] = app->add_option(
        "--beta", beta, "Second-hop weight b for K=2, or a comma list of K hop weights");
    given["dropout"] = app->add_option("--dropout", dropout, "Dropout rate");
    given["weight_decay"] = app->add_option("--weight-decay", weight_decay, "L2 factor");
    given["learning_rate"] = app->add_option("--lr", learning_rate, "Adam learning rate");
    given["epochs"] = app->add_option("--epochs", epochs, "Maximum epochs");
    given["patience"] = app->add_option("--patience", patience, "Early-stopping patience");
    given["seed"] = app->add_option("--seed", seed, "First seed");
    given["share_weights"] = app->add_flag("--share-weights", share_weights,
                                           "Bilinear path reuses the GNN weight (1 layer)");
    given["hop_mode"] = app->add_option("--hop-mode", hop_mode, "exact or within")
                            ->check(CLI::IsMember({"exact", "within"}));
  }

  bool has(const std::string& key) const { return given.at(key)->count() > 0; }

  ModelConfig resolve() const {
    ModelConfig cfg;
    bool beta_from_file = false;
    bool hidden_from_file = false;
    if (has("config")) {
      std::ifstream in(config_file);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config_file + ": " + e.what());
      }
      cfg = config_from_json(j);
      beta_from_file = j.contains("beta");
      hidden_from_file = j.contains("hidden_dim");
    } else {
      cfg.variant = parse_variant(model);
      cfg.layers = layers;
      cfg.alpha = alpha;
      cfg.dropout = dropout;
      cfg.weight_decay = weight_decay;
      cfg.learning_rate = learning_rate;
      cfg.max_epochs = epochs;
      cfg.patience = patience;
      cfg.seed = seed;
      cfg.share_weights = share_weights;
    }
    if (has("model")) cfg.variant = parse_variant(model);
    if (has("layers")) cfg.layers = layers;
    if (has("alpha")) cfg.alpha = alpha;
    if (has("dropout")) cfg.dropout = dropout;
    if (has("weight_decay")) cfg.weight_decay = weight_decay;
    if (has("learning_rate")) cfg.learning_rate = learning_rate;
    if (has("epochs")) cfg.max_epochs = epochs;
    if (has("patience")) cfg.patience = patience;
    if (has("seed")) cfg.seed = seed;
    if (has("share_weights")) cfg.share_weights = share_weights;
    if (has("hop_mode")) cfg.hop_mode = hop_mode == "exact" ? HopMode::ExactWalk : HopMode::WithinK;
    if (has("hidden")) {
      cfg.hidden_dim = hidden;
    } else if (!hidden_from_file) {
      cfg.hidden_dim = default_hidden_dim(cfg.variant);
    }
    if (has("beta")) {
      cfg.beta = parse_beta(beta, cfg.layers);
    } else if (!beta_from_file || cfg.beta.size() != cfg.layers) {
      cfg.beta.assign(cfg.layers, 1.0 / static_cast<double>(cfg.layers));
    }
    validate(cfg);
    return cfg;
  }

  static std::vector<double> parse_beta(const std::string& text, std::size_t layers) {
    const std::vector<double> values = parse_doubles(text, "--beta");
    if (values.size() == 1 && layers == 2) return two_hop_beta(values[0]);
    return values;
  }
};

ModelConfig with_beta(ModelConfig cfg, double b) {
  if (cfg.layers == 2) {
    cfg.beta = two_hop_beta(b);
  } else if (cfg.layers != 1) {
    throw ConfigError("beta sweeps need a 2-layer model");
  }
  return cfg;
}

std::size_t hops_for(const ModelConfig& cfg) {
  return has_bilinear_path(cfg.variant) ? cfg.layers : 1;
}

void write_json(const fs::path& file, const ojson& j) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

ojson dataset_json(const fs::path& dir, const GraphDataset& data) {
  return {{"path", dir.string()},
          {"name", data.name},
          {"num_nodes", data.num_nodes()},
          {"num_features", data.num_features()},
          {"num_classes", data.num_classes}};
}

class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> args)
      : command_(std::move(command)), args_(std::move(args)) {}

  ojson& extra() { return extra_; }

  void write(const fs::path& out_dir) const {
    ojson j;
    j["tool"] = "bgnn";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["args"] = args_;
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    write_json(out_dir / "manifest.json", j);
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  ojson extra_ = ojson::object();
};

std::string percent(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * x;
  return s.str();
}

struct Loaded {
  fs::path dir;
  GraphDataset data;
};

Loaded load(const std::string& spec, bool validate_data = true) {
  Loaded l;
  l.dir = resolve_dataset(spec);
  l.data = load_dataset(l.dir, {validate_data});
  return l;
}

ojson run_record(const TrainReport& r, std::size_t split) {
  return {{"seed", r.config.seed},
          {"split", split},
          {"test_acc", r.test_acc},
          {"best_val_acc", r.best_val_acc},
          {"best_epoch", r.best_epoch},
          {"epochs_run", r.epochs.size()},
          {"warnings", r.warnings}};
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double mean_val(const RepeatSummary& s) {
  std::vector<double> xs;
  for (const auto& r : s.reports) xs.push_back(r.best_val_acc);
  return mean_of(xs);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bilinear graph neural networks for node classification", "bgnn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string dataset;
  std::string out_dir = "bgnn-out";
  std::size_t jobs = 1;
  std::size_t runs = 10;
  std::size_t random_split_count = 0;
  bool raw_features = false;

  // train
  ModelFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train one configuration over several seeds");
  train_cmd->add_option("--dataset", dataset, "Dataset directory or name")->required();
  train_flags.attach(train_cmd);
  train_cmd->add_option("--runs", runs, "Independent runs (consecutive seeds)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--random-splits", random_split_count,
                        "Resample the training set this many times (0: fixed split)");
  train_cmd->add_option("--out", out_dir, "Output directory");
  train_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  train_cmd->add_flag("--raw-features", raw_features, "Skip feature row normalization");

  // evaluate
  std::string checkpoint;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--dataset", dataset, "Dataset directory or name")->required();
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", out_dir, "Output directory");
  eval_cmd->add_flag("--raw-features", raw_features, "Skip feature row normalization");

  // sweep
  ModelFlags sweep_flags;
  std::string sweep_mode = "figure";
  GridSpec grid = default_grid();
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy versus alpha and beta, or a full grid");
  sweep_cmd->add_option("--dataset", dataset, "Dataset directory or name")->required();
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--mode", sweep_mode, "figure: alpha and beta curves; grid: full search")
      ->check(CLI::IsMember({"figure", "grid"}));
  std::map<std::string, std::string> grid_text;
  for (const auto& [flag, help] :
       {std::pair<std::string, std::string>{"alpha", "Alpha values"},
        {"beta", "Second-hop weights"},
        {"dropout", "Dropout values (grid mode)"},
        {"weight-decay", "L2 values (grid mode)"}}) {
    sweep_cmd->add_option("--" + flag + "-grid", grid_text[flag], help + ", comma-separated");
  }
  sweep_cmd->add_option("--runs", runs, "Runs per point (figure) or for the best cell (grid)");
  sweep_cmd->add_option("--out", out_dir, "Output directory");
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--raw-features", raw_features, "Skip feature row normalization");

  // analyze
  std::string baseline_ckpt, model_ckpt;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Degree and label-ratio of test nodes by prediction outcome");
  analyze_cmd->add_option("--dataset", dataset, "Dataset directory or name")->required();
  analyze_cmd->add_option("--baseline", baseline_ckpt, "Baseline checkpoint (e.g. GCN)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--model", model_ckpt, "Compared checkpoint (e.g. BGCN-T)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", out_dir, "Output directory");
  analyze_cmd->add_flag("--raw-features", raw_features, "Skip feature row normalization");

  // gradcheck
  std::uint64_t gc_seed = 0;
  double gc_tolerance = 1e-5;
  GradcheckOptions gc_options;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every variant");
  gc_cmd->add_option("--seed", gc_seed, "Fixture and initialization seed");
  gc_cmd->add_option("--tolerance", gc_tolerance, "Maximum relative error");
  gc_cmd->add_option("--eps", gc_options.eps, "Central-difference step");
  gc_cmd->add_option("--floor", gc_options.floor, "Relative-error denominator floor");

  // bench
  std::size_t bench_nodes = 5000;
  std::vector<double> bench_degrees{2, 10, 50, 100, 200};
  std::size_t bench_dim = 16;
  std::size_t bench_repeats = 3;
  std::uint64_t bench_seed = 0;
  bool bench_no_naive = false;
  std::string bench_csv;
  auto* bench_cmd = app.add_subcommand("bench", "Pairwise versus linear-time bilinear aggregation");
  bench_cmd->add_option("--nodes", bench_nodes, "Nodes per graph")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--degrees", bench_degrees, "Mean degrees")->delimiter(',');
  bench_cmd->add_option("--dim", bench_dim, "Feature width")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--repeats", bench_repeats, "Timing repeats (best is kept)")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_seed, "Graph seed");
  bench_cmd->add_flag("--no-naive", bench_no_naive, "Time only the linear-time kernel");
  bench_cmd->add_option("--csv", bench_csv, "Also write the table to this file");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Validate a dataset and print its statistics");
  stats_cmd->add_option("--dataset", dataset, "Dataset directory or name")->required();

  // synth
  SyntheticSpec synth_spec;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic citation-like dataset");
  synth_cmd->add_option("--out", synth_out, "Dataset directory to create")->required();
  synth_cmd->add_option("--nodes", synth_spec.num_nodes, "Nodes");
  synth_cmd->add_option("--classes", synth_spec.num_classes, "Classes");
  synth_cmd->add_option("--features", synth_spec.num_features, "Vocabulary size");
  synth_cmd->add_option("--degree", synth_spec.mean_degree, "Mean degree");
  synth_cmd->add_option("--homophily", synth_spec.homophily, "Fraction of intra-class edges");
  synth_cmd->add_option("--val", synth_spec.val, "Validation nodes");
  synth_cmd->add_option("--test", synth_spec.test, "Test nodes");
  synth_cmd->add_option("--seed", synth_seed, "Seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      const ModelConfig cfg = train_flags.resolve();
      const Loaded l = load(dataset);
      const PreparedData prepared = prepare(l.data, hops_for(cfg), cfg.hop_mode, !raw_features);
      fs::create_directories(out_dir);
      const auto seeds = consecutive_seeds(cfg.seed, runs);

      std::vector<DataSplit> splits;
      if (random_split_count == 0) {
        splits.push_back(l.data.split);
      } else {
        Rng split_rng = make_rng(cfg.seed, Stream::Split);
        splits = random_splits(l.data, random_split_count, split_rng);
      }

      Manifest manifest("train", args);
      manifest.extra()["config"] = config_to_json(cfg);
      manifest.extra()["seeds"] = seeds;
      manifest.extra()["random_splits"] = random_split_count;
      manifest.extra()["feature_normalization"] = !raw_features;
      manifest.extra()["dataset"] = dataset_json(l.dir, l.data);
      manifest.write(out_dir);

      std::vector<double> accs;
      ojson records = ojson::array();
      for (std::size_t s = 0; s < splits.size(); ++s) {
        const RepeatSummary summary = repeat_runs(cfg, prepared, splits[s], seeds, jobs);
        for (const auto& r : summary.reports) {
          const std::string stem = "run-" + std::to_string(r.config.seed) +
                                   (random_split_count ? "-split" + std::to_string(s) : "");
          std::ofstream jsonl(fs::path(out_dir) / (stem + ".jsonl"));
          write_report_jsonl(r, jsonl);
          save_checkpoint({r.config, describe(l.data), r.best_state},
                          fs::path(out_dir) / (stem + ".ckpt"));
          for (const auto& w : r.warnings) err << "warning: seed " << r.config.seed << ": " << w << '\n';
          accs.push_back(r.test_acc);
          records.push_back(run_record(r, s));
        }
      }
      ojson summary;
      summary["model"] = std::string(to_string(cfg.variant));
      summary["layers"] = cfg.layers;
      summary["dataset"] = l.data.name;
      summary["runs"] = accs.size();
      summary["mean_test_acc"] = mean_of(accs);
      summary["std_test_acc"] = sample_std(accs);
      summary["per_run"] = records;
      write_json(fs::path(out_dir) / "summary.json", summary);
      out << to_string(cfg.variant) << " K=" << cfg.layers << " on " << l.data.name
          << ": test accuracy " << percent(mean_of(accs)) << " +- " << percent(sample_std(accs))
          << " over " << accs.size() << " run(s)\n";
      return kExitOk;
    }

    if (*eval_cmd) {
      const Checkpoint ckpt = load_checkpoint(checkpoint);
      const Loaded l = load(dataset);
      check_compatible(ckpt, l.data);
      const PreparedData prepared =
          prepare(l.data, hops_for(ckpt.config), ckpt.config.hop_mode, !raw_features);
      const Matrix logits =
          predict_logits(ckpt.config, ckpt.state, prepared.graph, prepared.features);
      ojson result;
      result["checkpoint"] = checkpoint;
      for (const auto& [name, mask] : {std::pair{"train", &l.data.split.train},
                                       std::pair{"val", &l.data.split.val},
                                       std::pair{"test", &l.data.split.test}}) {
        const double acc = mask->empty() ? 0.0 : accuracy(logits, l.data.labels, *mask);
        result[std::string(name) + "_acc"] = acc;
        out << name << " accuracy " << percent(acc) << " (" << mask->size() << " nodes)\n";
      }
      fs::create_directories(out_dir);
      write_json(fs::path(out_dir) / "evaluation.json", result);
      Manifest manifest("evaluate", args);
      manifest.extra()["config"] = config_to_json(ckpt.config);
      manifest.extra()["dataset"] = dataset_json(l.dir, l.data);
      manifest.write(out_dir);
      return kExitOk;
    }

    if (*sweep_cmd) {
      const ModelConfig base = sweep_flags.resolve();
      for (auto [flag, values] : {std::pair{"alpha", &grid.alpha},
                                  {"beta", &grid.beta},
                                  {"dropout", &grid.dropout},
                                  {"weight-decay", &grid.weight_decay}}) {
        if (sweep_cmd->get_option(std::string("--") + flag + "-grid")->count() > 0)
          *values = parse_doubles(grid_text[flag], std::string("--") + flag + "-grid");
      }
      if (grid.alpha.empty() || (base.layers == 2 && grid.beta.empty()) ||
          (sweep_mode == "grid" && (grid.dropout.empty() || grid.weight_decay.empty()))) {
        throw ConfigError("sweep: empty grid");
      }
      const Loaded l = load(dataset);
      const PreparedData prepared = prepare(l.data, hops_for(base), base.hop_mode, !raw_features);
      fs::create_directories(out_dir);
      Manifest manifest("sweep", args);
      manifest.extra()["config"] = config_to_json(base);
      manifest.extra()["mode"] = sweep_mode;
      manifest.extra()["grid"] = {{"dropout", grid.dropout},
                                  {"weight_decay", grid.weight_decay},
                                  {"alpha", grid.alpha},
                                  {"beta", grid.beta}};
      manifest.extra()["runs"] = runs;
      manifest.extra()["dataset"] = dataset_json(l.dir, l.data);
      manifest.write(out_dir);
      const auto seeds = consecutive_seeds(base.seed, runs);

      if (sweep_mode == "figure") {
        auto curve = [&](const std::string& param, const std::vector<double>& values) {
          std::ofstream csv(fs::path(out_dir) / (param + ".csv"));
          csv << "alpha,beta,runs,mean_val_acc,mean_test_acc,std_test_acc\n";
          out << param << " sweep\n";
          for (double x : values) {
            ModelConfig cfg = base;
            if (param == "alpha") {
              cfg.alpha = x;
            } else {
              cfg = with_beta(cfg, x);
            }
            validate(cfg);
            const RepeatSummary s = repeat_runs(cfg, prepared, l.data.split, seeds, jobs);
            const double b = cfg.beta.back();
            csv << cfg.alpha << ',' << b << ',' << runs << ',' << mean_val(s) << ','
                << s.mean_test_acc << ',' << s.std_test_acc << '\n';
            out << "  " << param << '=' << x << "  val " << percent(mean_val(s)) << "  test "
                << percent(s.mean_test_acc) << " +- " << percent(s.std_test_acc) << '\n';
          }
        };
        curve("alpha", grid.alpha);
        if (base.layers == 2) {
          if (base.alpha == 0.0 || !has_bilinear_path(base.variant)) {
            err << "warning: beta has no effect without a bilinear path (pass --alpha > 0)\n";
          }
          curve("beta", grid.beta);
        }
        return kExitOk;
      }

      const GridResult result = grid_search(grid, base, prepared, l.data.split, jobs);
      std::ofstream jsonl(fs::path(out_dir) / "grid.jsonl");
      for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& c = result.cells[i];
        ojson rec;
        rec["cell"] = i;
        rec["dropout"] = c.config.dropout;
        rec["weight_decay"] = c.config.weight_decay;
        rec["alpha"] = c.config.alpha;
        rec["beta"] = c.config.beta;
        rec["best_val_acc"] = c.report.best_val_acc;
        rec["best_val_loss"] = c.report.best_val_loss;
        rec["test_acc"] = c.report.test_acc;
        rec["best_epoch"] = c.report.best_epoch;
        jsonl << rec.dump() << '\n';
      }
      const ModelConfig& best = result.cells[result.best].config;
      const RepeatSummary s = repeat_runs(best, prepared, l.data.split, seeds, jobs);
      ojson best_json;
      best_json["config"] = config_to_json(best);
      best_json["cell"] = result.best;
      best_json["best_val_acc"] = result.cells[result.best].report.best_val_acc;
      best_json["runs"] = runs;
      best_json["mean_test_acc"] = s.mean_test_acc;
      best_json["std_test_acc"] = s.std_test_acc;
      write_json(fs::path(out_dir) / "best.json", best_json);
      out << "best of " << result.cells.size() << " cells: dropout " << best.dropout
          << ", weight decay " << best.weight_decay << ", alpha " << best.alpha << ", beta "
          << best.beta.back() << "; test accuracy " << percent(s.mean_test_acc) << " +- "
          << percent(s.std_test_acc) << " over " << runs << " run(s)\n";
      return kExitOk;
    }

    if (*analyze_cmd) {
      const Checkpoint base = load_checkpoint(baseline_ckpt);
      const Checkpoint model = load_checkpoint(model_ckpt);
      const Loaded l = load(dataset);
      check_compatible(base, l.data);
      check_compatible(model, l.data);
      auto predictions = [&](const Checkpoint& c) {
        const PreparedData p = prepare(l.data, hops_for(c.config), c.config.hop_mode, !raw_features);
        return argmax_rows(predict_logits(c.config, c.state, p.graph, p.features));
      };
      const AgreementTable table = agreement_table(l.data.adjacency, l.data.labels,
                                                   l.data.split.test, predictions(base),
                                                   predictions(model));
      fs::create_directories(out_dir);
      std::ofstream csv(fs::path(out_dir) / "analysis.csv");
      csv << "category,count,mean_degree,mean_ratio\n";
      out << "baseline " << to_string(base.config.variant) << " vs model "
          << to_string(model.config.variant) << " on " << l.data.split.test.size()
          << " test nodes\n";
      out << std::left << std::setw(13) << "category" << std::setw(8) << "count" << std::setw(10)
          << "degree" << "ratio\n";
      for (Agreement a : kAllAgreements) {
        const auto& row = table[a];
        csv << to_string(a) << ',' << row.count << ',' << row.mean_degree << ',' << row.mean_ratio
            << '\n';
        out << std::left << std::setw(13) << to_string(a) << std::setw(8) << row.count
            << std::setw(10) << std::fixed << std::setprecision(2) << row.mean_degree
            << std::setprecision(3) << row.mean_ratio << '\n';
      }
      Manifest manifest("analyze", args);
      manifest.extra()["baseline"] = config_to_json(base.config);
      manifest.extra()["model"] = config_to_json(model.config);
      manifest.extra()["dataset"] = dataset_json(l.dir, l.data);
      manifest.write(out_dir);
      return kExitOk;
    }

    if (*gc_cmd) {
      const GraphDataset fixture = gradcheck_dataset(gc_seed);
      bool ok = true;
      out << "variant  K  max_rel_error  result\n";
      for (Variant v : kAllVariants) {
        for (std::size_t k : {1, 2}) {
          ModelConfig cfg;
          cfg.variant = v;
          cfg.layers = k;
          cfg.hidden_dim = 4;
          cfg.alpha = has_bilinear_path(v) ? 0.4 : 0.0;
          cfg.beta = k == 1 ? std::vector<double>{1.0} : two_hop_beta(0.3);
          cfg.dropout = 0.3;
          cfg.seed = gc_seed;
          const GradcheckResult r = model_gradcheck(cfg, fixture, gc_options);
          const bool pass = r.max_rel_error < gc_tolerance;
          ok = ok && pass;
          out << std::left << std::setw(9) << to_string(v) << std::setw(3) << k
              << std::setw(15) << std::scientific << std::setprecision(3) << r.max_rel_error
              << (pass ? "PASS" : "FAIL") << '\n';
        }
      }
      return ok ? kExitOk : kExitNumeric;
    }

    if (*bench_cmd) {
      if (bench_degrees.empty()) throw ConfigError("bench: no degrees given");
      std::ostringstream table;
      table << "nodes,mean_degree,nnz,naive_seconds,fast_seconds,speedup\n";
      for (double d : bench_degrees) {
        const BenchRow r =
            bench_bilinear(bench_nodes, d, bench_dim, bench_seed, bench_repeats, !bench_no_naive);
        table << r.nodes << ',' << r.mean_degree << ',' << r.nnz << ',';
        if (r.naive_seconds >= 0.0) {
          table << r.naive_seconds << ',' << r.fast_seconds << ','
                << r.naive_seconds / r.fast_seconds << '\n';
        } else {
          table << ',' << r.fast_seconds << ",\n";
        }
      }
      out << table.str();
      if (!bench_csv.empty()) {
        std::ofstream csv(bench_csv);
        if (!csv) throw DataError("cannot write " + bench_csv);
        csv << table.str();
      }
      return kExitOk;
    }

    if (*stats_cmd) {
      const Loaded l = load(dataset, false);
      const auto violations = validate(l.data);
      const DatasetStats s = stats(l.data);
      ojson j;
      j["name"] = l.data.name;
      j["num_nodes"] = s.num_nodes;
      j["nnz"] = s.nnz;
      j["num_features"] = s.num_features;
      j["num_classes"] = s.num_classes;
      j["train"] = s.train;
      j["val"] = s.val;
      j["test"] = s.test;
      j["isolated"] = s.isolated;
      j["degree_histogram"] = s.degree_histogram;
      j["violations"] = violations;
      out << j.dump(2) << '\n';
      return violations.empty() ? kExitOk : kExitData;
    }

    if (*synth_cmd) {
      Rng rng = make_rng(synth_seed, Stream::Synthetic);
      GraphDataset data = synthetic_citation(synth_spec, rng);
      save_dataset(data, synth_out);
      out << "wrote " << data.num_nodes() << " nodes, " << data.adjacency.nnz() / 2
          << " edges to " << synth_out << '\n';
      return kExitOk;
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace bgnn
