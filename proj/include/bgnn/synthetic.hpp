#pragma once

#include <cstddef>
#include <vector>

#include "bgnn/dataset.hpp"
#include "bgnn/graph.hpp"
#include "bgnn/matrix.hpp"
#include "bgnn/random.hpp"

namespace bgnn {

// Uniform random simple graph with about n * mean_degree / 2 edges
// (sampled pairs, duplicates and self-pairs dropped).
SparseAdjacency random_graph(std::size_t n, double mean_degree, Rng& rng);

// Entries uniform in [lo, hi).
Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0);

// Uniform random permutation of 0..n-1.
std::vector<NodeId> random_permutation(std::size_t n, Rng& rng);

// Citation-like benchmark: a planted-partition graph with sparse binary
// bag-of-words features whose word distribution depends on the class.
struct SyntheticSpec {
  std::size_t num_nodes = 600;
  std::size_t num_classes = 4;
  std::size_t num_features = 200;
  double mean_degree = 4.0;
  double homophily = 0.8;      // fraction of edges inside a class
  std::size_t words_per_node = 12;
  double topic_share = 0.3;    // fraction of words drawn from the class topic
  std::size_t train_per_class = 20;
  std::size_t val = 100;
  std::size_t test = 200;
};

GraphDataset synthetic_citation(const SyntheticSpec& spec, Rng& rng);

}  // namespace bgnn
