#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bgnn/graph.hpp"
#include "bgnn/matrix.hpp"

namespace bgnn {

struct DataSplit {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  friend bool operator==(const DataSplit&, const DataSplit&) = default;
};

// Node-classification dataset: binary symmetric adjacency without
// self-loops, dense features (N x F), one label per node and a split.
struct GraphDataset {
  std::string name;
  std::size_t num_classes = 0;
  SparseAdjacency adjacency;
  Matrix features;
  std::vector<std::int32_t> labels;
  DataSplit split;

  std::size_t num_nodes() const { return labels.size(); }
  std::size_t num_features() const { return features.cols(); }

  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

struct LoadOptions {
  // Throw DataError when validate() reports violations.
  bool validate = true;
};

// Reads the directory layout
//   meta.json        {"num_nodes", "num_features", "num_classes", "name"}
//   graph.edges      "u v" per undirected edge, u < v
//   features.sparse  "col:value ..." per node, empty line = zero row
//   labels.txt       one class index per node
//   split.train / split.val / split.test   ascending node indices
// Parse errors name the file and line. Edge orientation is normalized on
// read; duplicate edges are rejected.
GraphDataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {});

// Writes the same layout; values round-trip exactly.
void save_dataset(const GraphDataset& data, const std::filesystem::path& dir);

// Every violated dataset invariant, one message each. Empty iff valid.
std::vector<std::string> validate(const GraphDataset& data);

struct DatasetStats {
  std::size_t num_nodes = 0;
  std::size_t nnz = 0;  // stored adjacency entries (2 x undirected edges)
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  std::size_t isolated = 0;
  std::vector<std::size_t> degree_histogram;  // [d] = nodes of degree d
};

DatasetStats stats(const GraphDataset& data);

// Scales each feature row to sum to 1 (zero rows untouched).
void row_normalize(Matrix& features);

}  // namespace bgnn
