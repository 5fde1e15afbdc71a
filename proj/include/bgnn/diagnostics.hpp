#pragma once

#include <cstddef>
#include <cstdint>

#include "bgnn/dataset.hpp"
#include "bgnn/gradcheck.hpp"
#include "bgnn/model.hpp"

namespace bgnn {

// Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3; class 0 on the
// first triangle, class 1 on the second. Train {0,3}, val {1,4}, test {2,5}.
GraphDataset tiny_dataset();

// Random 8-node, 5-feature, 3-class instance with dense features.
GraphDataset gradcheck_dataset(std::uint64_t seed);

// Gradient check of the full training objective (masked cross-entropy on
// the train mask + L2) with respect to every model parameter. Dropout is
// active with a mask that is redrawn identically on every evaluation.
GradcheckResult model_gradcheck(const ModelConfig& cfg, const GraphDataset& data,
                                const GradcheckOptions& options = {});

struct BenchRow {
  std::size_t nodes = 0;
  double mean_degree = 0.0;
  std::size_t nnz = 0;     // of A + I
  double fast_seconds = 0.0;
  double naive_seconds = -1.0;  // negative when not measured
};

// Best-of-`repeats` wall time of the bilinear aggregator (all pairs) on a
// random graph with `dim`-wide transformed features.
BenchRow bench_bilinear(std::size_t nodes, double mean_degree, std::size_t dim, std::uint64_t seed,
                        std::size_t repeats = 3, bool measure_naive = true);

}  // namespace bgnn
