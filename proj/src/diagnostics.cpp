#include "bgnn/diagnostics.hpp"

#include <chrono>
#include <limits>

#include "bgnn/aggregators.hpp"
#include "bgnn/ops.hpp"
#include "bgnn/synthetic.hpp"

namespace bgnn {

GraphDataset tiny_dataset() {
  GraphDataset data;
  data.name = "tiny";
  data.num_classes = 2;
  const Edge edges[] = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {3, 5}, {4, 5}};
  data.adjacency = SparseAdjacency::from_edges(6, edges);
  data.features = Matrix{{1, 0, 1, 0}, {1, 0, 0, 0}, {1, 1, 0, 0},
                         {0, 1, 0, 1}, {0, 0, 0, 1}, {0, 0, 1, 1}};
  data.labels = {0, 0, 0, 1, 1, 1};
  data.split = {{0, 3}, {1, 4}, {2, 5}};
  return data;
}

GraphDataset gradcheck_dataset(std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::Synthetic);
  GraphDataset data;
  data.name = "gradcheck";
  data.num_classes = 3;
  data.adjacency = random_graph(8, 3.0, rng);
  data.features = random_matrix(8, 5, rng);
  std::uniform_int_distribution<std::int32_t> label(0, 2);
  for (int v = 0; v < 8; ++v) data.labels.push_back(label(rng));
  data.split = {{0, 1, 2, 3, 4}, {5, 6}, {7}};
  return data;
}

GradcheckResult model_gradcheck(const ModelConfig& cfg, const GraphDataset& data,
                                const GradcheckOptions& options) {
  validate(cfg);
  const GraphOperators graph = build_graph_operators(data.adjacency, cfg.layers, cfg.hop_mode);
  const ModelState state = init_params(cfg, {data.num_features(), data.num_classes});
  std::vector<Matrix> inputs;
  for (const auto& p : state.params) inputs.push_back(p.value);
  const ScalarFunction f = [&](Tape& tape, std::span<const Var> vars) {
    Rng rng = make_rng(cfg.seed, Stream::Dropout);
    ForwardOptions fo{true, &rng, vars};
    const ForwardResult fw = forward(tape, cfg, state, graph, data.features, fo);
    const Var ce = masked_cross_entropy(fw.logits, data.labels, data.split.train);
    return add_scaled(ce, l2_penalty(state, fw.params, cfg.weight_decay), 1.0, 1.0);
  };
  return gradcheck(f, inputs, options);
}

BenchRow bench_bilinear(std::size_t nodes, double mean_degree, std::size_t dim, std::uint64_t seed,
                        std::size_t repeats, bool measure_naive) {
  Rng rng = make_rng(seed, Stream::Synthetic);
  const SparseAdjacency adj = add_self_loops(random_graph(nodes, mean_degree, rng));
  const Matrix h = random_matrix(nodes, dim, rng);
  const Matrix w = Matrix::identity(dim);
  BenchRow row;
  row.nodes = nodes;
  row.mean_degree = mean_degree;
  row.nnz = adj.nnz();
  using clock = std::chrono::steady_clock;
  auto best_of = [&](auto&& body) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
      const auto t0 = clock::now();
      body();
      best = std::min(best, std::chrono::duration<double>(clock::now() - t0).count());
    }
    return best;
  };
  // Both sides include the transform S = H W.
  row.fast_seconds = best_of([&] {
    Tape tape;
    const Var out = bilinear_fast(tape.constant_view(h), adj, tape.constant_view(w),
                                  BilinearScope::AllPairs);
    (void)out;
  });
  if (measure_naive) {
    row.naive_seconds = best_of([&] {
      const Matrix out = bilinear_naive(matmul(h, w), adj, BilinearScope::AllPairs);
      (void)out;
    });
  }
  return row;
}

}  // namespace bgnn
