#include "bgnn/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "bgnn/error.hpp"
#include "bgnn/ops.hpp"
#include "bgnn/serialize.hpp"

namespace bgnn {

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(ModelState& state, std::span<const Matrix> grads) {
  if (grads.size() != state.params.size()) throw ShapeError("Adam: gradient count mismatch");
  if (m_.empty()) {
    for (const auto& p : state.params) {
      m_.emplace_back(p.value.rows(), p.value.cols());
      v_.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto w = state.params[i].value.data();
    auto g = grads[i].data();
    auto m = m_[i].data();
    auto v = v_[i].data();
    if (g.size() != w.size()) throw ShapeError("Adam: gradient shape mismatch");
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      w[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

PreparedData prepare(const GraphDataset& data, std::size_t hops, HopMode mode,
                     bool normalize_features) {
  PreparedData p;
  p.data = &data;
  p.features = data.features;
  if (normalize_features) row_normalize(p.features);
  p.graph = build_graph_operators(data.adjacency, hops, mode);
  return p;
}

double accuracy(const Matrix& logits, std::span<const std::int32_t> labels,
                std::span<const NodeId> mask) {
  if (mask.empty()) throw ConfigError("accuracy: empty mask");
  std::size_t correct = 0;
  for (NodeId v : mask) {
    auto row = logits.row(v);
    const auto pred = std::max_element(row.begin(), row.end()) - row.begin();
    if (pred == labels[v]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double evaluate(const ModelConfig& cfg, const ModelState& state, const PreparedData& prepared,
                std::span<const NodeId> mask) {
  if (mask.empty()) throw ConfigError("evaluate: empty mask");
  return accuracy(predict_logits(cfg, state, prepared.graph, prepared.features), prepared.labels(),
                  mask);
}

namespace {

struct Evaluation {
  double train_acc = 0.0;
  double val_acc = 0.0;
  double val_loss = 0.0;
};

Evaluation evaluate_epoch(const ModelConfig& cfg, const ModelState& state,
                          const PreparedData& prepared, const DataSplit& split) {
  Tape tape;
  const ForwardResult fw = forward(tape, cfg, state, prepared.graph, prepared.features);
  Evaluation e;
  e.train_acc = accuracy(fw.logits.value(), prepared.labels(), split.train);
  e.val_acc = accuracy(fw.logits.value(), prepared.labels(), split.val);
  e.val_loss = masked_cross_entropy(fw.logits, prepared.labels(), split.val).value()(0, 0);
  return e;
}

}  // namespace

TrainReport train(const ModelConfig& cfg, const PreparedData& prepared, const DataSplit& split) {
  validate(cfg);
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw ConfigError("train: train, val and test masks must be non-empty");
  }
  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  report.config = cfg;

  ModelState state = init_params(cfg, prepared.dims());
  Rng dropout_rng = make_rng(cfg.seed, Stream::Dropout);
  Adam optimizer(cfg.learning_rate);

  double best_acc = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<Matrix> grads(state.params.size());

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    {
      Tape tape;
      ForwardOptions opts{true, &dropout_rng, {}};
      const ForwardResult fw = forward(tape, cfg, state, prepared.graph, prepared.features, opts);
      Var loss = masked_cross_entropy(fw.logits, prepared.labels(), split.train);
      if (cfg.weight_decay > 0.0) {
        loss = add_scaled(loss, l2_penalty(state, fw.params, cfg.weight_decay), 1.0, 1.0);
      }
      rec.train_loss = loss.value()(0, 0);
      if (!std::isfinite(rec.train_loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           ": loss = " + std::to_string(rec.train_loss));
      }
      tape.backward(loss);
      for (std::size_t i = 0; i < grads.size(); ++i) grads[i] = fw.params[i].grad();
    }
    optimizer.step(state, grads);

    const Evaluation e = evaluate_epoch(cfg, state, prepared, split);
    rec.train_acc = e.train_acc;
    rec.val_acc = e.val_acc;
    rec.val_loss = e.val_loss;
    if (!std::isfinite(rec.val_loss)) {
      throw NumericError("validation loss non-finite at epoch " + std::to_string(epoch));
    }
    report.epochs.push_back(rec);

    const bool improved = e.val_acc > best_acc || (e.val_acc == best_acc && e.val_loss < best_loss);
    if (improved) {
      best_acc = e.val_acc;
      best_loss = e.val_loss;
      report.best_epoch = epoch;
      report.best_state = state;
      since_best = 0;
    } else if (++since_best > cfg.patience) {
      report.stopped_early = true;
      break;
    }
  }
  if (report.epochs.empty()) throw ConfigError("train: max_epochs must be at least 1");

  report.best_val_acc = best_acc;
  report.best_val_loss = best_loss;
  report.test_acc = evaluate(cfg, report.best_state, prepared, split.test);

  const std::size_t window = std::min<std::size_t>(50, report.epochs.size());
  if (window >= 20) {
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      head += report.epochs[i].train_loss;
      tail += report.epochs[window - 10 + i].train_loss;
    }
    if (tail > head) {
      report.warnings.push_back("training loss rose over the first " + std::to_string(window) +
                                " epochs");
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainReport train(const ModelConfig& cfg, const PreparedData& prepared) {
  return train(cfg, prepared, prepared.data->split);
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t GridSpec::cells(std::size_t layers) const {
  return dropout.size() * weight_decay.size() * alpha.size() * (layers == 2 ? beta.size() : 1);
}

GridSpec default_grid() {
  const std::vector<double> mix{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  return GridSpec{{0.0, 0.2, 0.4, 0.6}, {0.0, 1e-4, 5e-4, 1e-3}, mix, mix};
}

GridResult grid_search(const GridSpec& grid, const ModelConfig& base, const PreparedData& prepared,
                       const DataSplit& split, std::size_t jobs) {
  if (grid.dropout.empty() || grid.weight_decay.empty() || grid.alpha.empty() ||
      (base.layers == 2 && grid.beta.empty())) {
    throw ConfigError("grid_search: every grid list must be non-empty");
  }
  GridResult result;
  const std::vector<double> no_beta{0.0};
  const auto& betas = base.layers == 2 ? grid.beta : no_beta;
  for (double p : grid.dropout)
    for (double lambda : grid.weight_decay)
      for (double a : grid.alpha)
        for (double b : betas) {
          ModelConfig cfg = base;
          cfg.dropout = p;
          cfg.weight_decay = lambda;
          cfg.alpha = a;
          if (base.layers == 2) cfg.beta = two_hop_beta(b);
          validate(cfg);
          result.cells.push_back({cfg, {}});
        }
  parallel_for(result.cells.size(), jobs, [&](std::size_t i) {
    result.cells[i].report = train(result.cells[i].config, prepared, split);
  });
  auto key = [](const GridCell& c) {
    const double b = c.config.beta.empty() ? 0.0 : c.config.beta.back();
    return std::make_tuple(-c.report.best_val_acc, c.config.weight_decay, c.config.dropout,
                           c.config.alpha, b);
  };
  for (std::size_t i = 1; i < result.cells.size(); ++i) {
    if (key(result.cells[i]) < key(result.cells[result.best])) result.best = i;
  }
  return result;
}

std::vector<std::uint64_t> consecutive_seeds(std::uint64_t first, std::size_t n) {
  std::vector<std::uint64_t> seeds(n);
  std::iota(seeds.begin(), seeds.end(), first);
  return seeds;
}

RepeatSummary repeat_runs(const ModelConfig& cfg, const PreparedData& prepared,
                          const DataSplit& split, std::span<const std::uint64_t> seeds,
                          std::size_t jobs) {
  if (seeds.empty()) throw ConfigError("repeat_runs: need at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("repeat_runs: seeds must be distinct");
  }
  RepeatSummary summary;
  summary.reports.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    ModelConfig run = cfg;
    run.seed = seeds[i];
    summary.reports[i] = train(run, prepared, split);
  });
  double total = 0.0;
  for (const auto& r : summary.reports) total += r.test_acc;
  const double n = static_cast<double>(seeds.size());
  summary.mean_test_acc = total / n;
  if (seeds.size() > 1) {
    double sq = 0.0;
    for (const auto& r : summary.reports) {
      const double d = r.test_acc - summary.mean_test_acc;
      sq += d * d;
    }
    summary.std_test_acc = std::sqrt(sq / (n - 1.0));
  }
  return summary;
}

std::vector<DataSplit> random_splits(const GraphDataset& data, std::size_t n_splits, Rng& rng,
                                     std::size_t per_class) {
  std::vector<std::uint8_t> held_out(data.num_nodes(), 0);
  for (NodeId v : data.split.val) held_out[v] = 1;
  for (NodeId v : data.split.test) held_out[v] = 1;
  std::vector<std::vector<NodeId>> pool(data.num_classes);
  for (std::size_t v = 0; v < data.num_nodes(); ++v) {
    if (!held_out[v]) pool[static_cast<std::size_t>(data.labels[v])].push_back(static_cast<NodeId>(v));
  }
  for (std::size_t c = 0; c < pool.size(); ++c) {
    if (pool[c].size() < per_class) {
      throw DataError("random_splits: class " + std::to_string(c) + " has only " +
                      std::to_string(pool[c].size()) + " candidate nodes, need " +
                      std::to_string(per_class));
    }
  }
  std::vector<DataSplit> splits;
  for (std::size_t s = 0; s < n_splits; ++s) {
    DataSplit split{{}, data.split.val, data.split.test};
    for (auto& candidates : pool) {
      // Partial Fisher-Yates: the first per_class entries become the sample.
      for (std::size_t i = 0; i < per_class; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
        split.train.push_back(candidates[i]);
      }
    }
    std::sort(split.train.begin(), split.train.end());
    splits.push_back(std::move(split));
  }
  return splits;
}

void write_report_jsonl(const TrainReport& report, std::ostream& out) {
  for (const auto& e : report.epochs) {
    nlohmann::ordered_json j;
    j["type"] = "epoch";
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["train_acc"] = e.train_acc;
    j["val_loss"] = e.val_loss;
    j["val_acc"] = e.val_acc;
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json s;
  s["type"] = "summary";
  s["seed"] = report.config.seed;
  s["epochs_run"] = report.epochs.size();
  s["best_epoch"] = report.best_epoch;
  s["best_val_acc"] = report.best_val_acc;
  s["best_val_loss"] = report.best_val_loss;
  s["test_acc"] = report.test_acc;
  s["stopped_early"] = report.stopped_early;
  s["warnings"] = report.warnings;
  s["config"] = config_to_json(report.config);
  out << s.dump() << '\n';
}

}  // namespace bgnn
