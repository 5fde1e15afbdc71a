#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bgnn/dataset.hpp"
#include "bgnn/model.hpp"

namespace bgnn {

// Adam with bias correction.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(ModelState& state, std::span<const Matrix> grads);
  std::size_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

// A dataset with everything the trainer derives from it once: the
// (optionally row-normalized) features and the graph operators up to
// `hops` hops. Read-only; shared by concurrent runs.
struct PreparedData {
  const GraphDataset* data = nullptr;
  Matrix features;
  GraphOperators graph;

  std::span<const std::int32_t> labels() const { return data->labels; }
  ModelDims dims() const { return {features.cols(), data->num_classes}; }
};

PreparedData prepare(const GraphDataset& data, std::size_t hops, HopMode mode = HopMode::ExactWalk,
                     bool normalize_features = true);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // training-mode objective (cross-entropy + L2)
  double train_acc = 0.0;
  double val_loss = 0.0;    // inference-mode cross-entropy
  double val_acc = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  ModelConfig config;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  double best_val_loss = 0.0;
  double test_acc = 0.0;  // at best-epoch parameters
  bool stopped_early = false;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  ModelState best_state;
};

// Full-graph training: Adam on masked cross-entropy + weight_decay * sum
// ||W||^2, evaluated on val every epoch. The best epoch maximizes val
// accuracy, ties broken by lower val loss, then earliest. Stops after
// max_epochs or once `patience` consecutive epochs fail to improve; then
// restores the best parameters and evaluates test once. Throws
// NumericError if the loss becomes non-finite.
TrainReport train(const ModelConfig& cfg, const PreparedData& prepared, const DataSplit& split);
TrainReport train(const ModelConfig& cfg, const PreparedData& prepared);

// argmax accuracy of logits over `mask`.
double accuracy(const Matrix& logits, std::span<const std::int32_t> labels,
                std::span<const NodeId> mask);
// Inference accuracy (dropout off) of a model over `mask`.
double evaluate(const ModelConfig& cfg, const ModelState& state, const PreparedData& prepared,
                std::span<const NodeId> mask);

struct GridSpec {
  std::vector<double> dropout;
  std::vector<double> weight_decay;
  std::vector<double> alpha;
  // Second-hop weight b of a 2-layer model (beta = (1-b, b)); ignored for
  // other depths.
  std::vector<double> beta;

  std::size_t cells(std::size_t layers) const;
};

// Grids searched for the published experiments.
GridSpec default_grid();

struct GridCell {
  ModelConfig config;
  TrainReport report;
};

struct GridResult {
  std::vector<GridCell> cells;  // dropout-major product order
  std::size_t best = 0;
};

// Exhaustive search over the grid product. The best cell has the highest
// val accuracy; ties go to lower weight decay, then lower dropout, then
// lower alpha, then lower beta.
GridResult grid_search(const GridSpec& grid, const ModelConfig& base, const PreparedData& prepared,
                       const DataSplit& split, std::size_t jobs = 1);

struct RepeatSummary {
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;  // sample standard deviation; 0 for one run
  std::vector<TrainReport> reports;
};

// One training per seed (seeds must be distinct).
RepeatSummary repeat_runs(const ModelConfig& cfg, const PreparedData& prepared,
                          const DataSplit& split, std::span<const std::uint64_t> seeds,
                          std::size_t jobs = 1);
std::vector<std::uint64_t> consecutive_seeds(std::uint64_t first, std::size_t n);

// Resamples `per_class` training nodes per class from nodes outside the
// split's val and test sets, keeping val/test unchanged. Throws DataError
// if a class has too few candidates.
std::vector<DataSplit> random_splits(const GraphDataset& data, std::size_t n_splits, Rng& rng,
                                     std::size_t per_class = 20);

// Runs task(i) for i in [0, count) on up to `jobs` threads; rethrows the
// first failure.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task);

// Line-delimited JSON: one "epoch" record per epoch, then one "summary"
// record. Contains no timing, so reruns are byte-identical.
void write_report_jsonl(const TrainReport& report, std::ostream& out);

}  // namespace bgnn
