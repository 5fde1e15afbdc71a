#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bgnn {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Compressed sparse row adjacency. Column indices are strictly increasing
// within each row. Without `values` the matrix is binary (all stored
// entries equal 1).
class SparseAdjacency {
 public:
  SparseAdjacency() = default;
  // Validates row_ptr monotonicity, column range and per-row ordering.
  SparseAdjacency(std::size_t num_nodes, std::vector<std::size_t> row_ptr,
                  std::vector<NodeId> col_idx,
                  std::optional<std::vector<double>> values = std::nullopt);

  // Builds the symmetric binary adjacency of an undirected edge list. Each
  // edge may be given in either orientation but only once; self-loops and
  // duplicates throw GraphError.
  static SparseAdjacency from_edges(std::size_t num_nodes, std::span<const Edge> edges);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t nnz() const { return col_idx_.size(); }
  bool weighted() const { return values_.has_value(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const NodeId> col_idx() const { return col_idx_; }
  std::span<const double> values() const;

  std::span<const NodeId> row(std::size_t v) const {
    return {col_idx_.data() + row_ptr_[v], row_ptr_[v + 1] - row_ptr_[v]};
  }
  std::size_t row_length(std::size_t v) const { return row_ptr_[v + 1] - row_ptr_[v]; }
  // Value of the k-th stored entry (1 for binary matrices).
  double value(std::size_t k) const { return values_ ? (*values_)[k] : 1.0; }

  bool contains(std::size_t v, std::size_t i) const;
  bool has_diagonal_entries() const;
  bool is_structurally_symmetric() const;
  bool has_symmetric_values() const;

  // Undirected edges (v < i) in row-major order.
  std::vector<Edge> edges() const;

  friend bool operator==(const SparseAdjacency&, const SparseAdjacency&) = default;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<NodeId> col_idx_;
  std::optional<std::vector<double>> values_;
};

// Extended degree d~_v = d_v + 1 per node.
using DegreeVector = std::vector<std::size_t>;

struct InteractionCounts {
  std::vector<double> pairs;          // b_v = d~_v (d~_v - 1) / 2
  std::vector<std::uint8_t> isolated; // 1 where b_v == 0
};

// How binarized k-hop adjacencies are formed.
enum class HopMode {
  ExactWalk,  // binarize(A^k): walks of length exactly k
  WithinK,    // binarize(A + A^2 + ... + A^k): reachable within k steps
};

// A + I. Throws GraphError if any diagonal entry already exists.
SparseAdjacency add_self_loops(const SparseAdjacency& adj);
// Drops diagonal entries, keeping values of the rest.
SparseAdjacency remove_self_loops(const SparseAdjacency& adj);

// Value 1/sqrt(d~_v d~_i) on every stored entry of A + I.
SparseAdjacency gcn_normalize(const SparseAdjacency& adj_with_loops);

// Boolean product of the structures of a and b (row-merge, sorted output).
SparseAdjacency boolean_product(const SparseAdjacency& a, const SparseAdjacency& b);
// Structural union of two binary matrices of the same size.
SparseAdjacency structural_union(const SparseAdjacency& a, const SparseAdjacency& b);

// Binarized k-hop connectivity with the diagonal removed. k = 1 returns the
// input structure. Throws GraphError for k = 0.
SparseAdjacency khop_binarize(const SparseAdjacency& adj, std::size_t k,
                              HopMode mode = HopMode::ExactWalk);

DegreeVector extended_degrees(const SparseAdjacency& adj_with_loops);
InteractionCounts interaction_counts(const SparseAdjacency& adj_with_loops);

// Relabels node v as perm[v]: returns P A P^T.
SparseAdjacency permute(const SparseAdjacency& adj, std::span<const NodeId> perm);

}  // namespace bgnn
