#include "bgnn/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "bgnn/error.hpp"

namespace bgnn {

namespace {

SparseAdjacency from_pairs(std::size_t n, std::vector<Edge> pairs) {
  for (auto& e : pairs) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::erase_if(pairs, [](const Edge& e) { return e.first == e.second; });
  return SparseAdjacency::from_edges(n, pairs);
}

}  // namespace

SparseAdjacency random_graph(std::size_t n, double mean_degree, Rng& rng) {
  if (n < 2) return SparseAdjacency::from_edges(n, {});
  const auto m = static_cast<std::size_t>(static_cast<double>(n) * mean_degree / 2.0);
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  std::vector<Edge> pairs;
  pairs.reserve(m);
  for (std::size_t e = 0; e < m; ++e) pairs.emplace_back(node(rng), node(rng));
  return from_pairs(n, std::move(pairs));
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = dist(rng);
  return m;
}

std::vector<NodeId> random_permutation(std::size_t n, Rng& rng) {
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

GraphDataset synthetic_citation(const SyntheticSpec& spec, Rng& rng) {
  const std::size_t n = spec.num_nodes;
  const std::size_t c = spec.num_classes;
  if (c == 0 || spec.num_features < c) throw ConfigError("synthetic: need 1 <= classes <= features");
  if (spec.train_per_class * c + spec.val + spec.test > n) {
    throw ConfigError("synthetic: split sizes exceed the node count");
  }
  GraphDataset data;
  data.name = "synthetic";
  data.num_classes = c;
  data.labels.resize(n);
  for (std::size_t v = 0; v < n; ++v) data.labels[v] = static_cast<std::int32_t>(v % c);
  std::shuffle(data.labels.begin(), data.labels.end(), rng);
  std::vector<std::vector<NodeId>> members(c);
  for (std::size_t v = 0; v < n; ++v) members[data.labels[v]].push_back(static_cast<NodeId>(v));

  std::uniform_int_distribution<NodeId> any(0, static_cast<NodeId>(n - 1));
  std::bernoulli_distribution inside(spec.homophily);
  std::vector<Edge> pairs;
  const auto m = static_cast<std::size_t>(static_cast<double>(n) * spec.mean_degree / 2.0);
  for (std::size_t e = 0; e < m; ++e) {
    const NodeId u = any(rng);
    NodeId v = any(rng);
    if (inside(rng)) {
      const auto& same = members[data.labels[u]];
      v = same[std::uniform_int_distribution<std::size_t>(0, same.size() - 1)(rng)];
    }
    pairs.emplace_back(u, v);
  }
  data.adjacency = from_pairs(n, std::move(pairs));

  // Each class owns a contiguous block of the vocabulary as its topic.
  const std::size_t block = spec.num_features / c;
  std::bernoulli_distribution topical(spec.topic_share);
  std::uniform_int_distribution<std::size_t> word(0, spec.num_features - 1);
  std::uniform_int_distribution<std::size_t> topic_word(0, block - 1);
  data.features = Matrix(n, spec.num_features);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < spec.words_per_node; ++w) {
      const std::size_t col = topical(rng)
                                  ? static_cast<std::size_t>(data.labels[v]) * block + topic_word(rng)
                                  : word(rng);
      data.features(v, col) = 1.0;
    }
  }

  std::vector<NodeId> order = random_permutation(n, rng);
  std::vector<std::size_t> taken(c, 0);
  std::vector<std::uint8_t> used(n, 0);
  for (NodeId v : order) {
    auto& t = taken[data.labels[v]];
    if (t < spec.train_per_class) {
      ++t;
      used[v] = 1;
      data.split.train.push_back(v);
    }
  }
  for (NodeId v : order) {
    if (used[v]) continue;
    if (data.split.val.size() < spec.val) {
      data.split.val.push_back(v);
    } else if (data.split.test.size() < spec.test) {
      data.split.test.push_back(v);
    }
  }
  std::sort(data.split.train.begin(), data.split.train.end());
  std::sort(data.split.val.begin(), data.split.val.end());
  std::sort(data.split.test.begin(), data.split.test.end());
  return data;
}

}  // namespace bgnn
