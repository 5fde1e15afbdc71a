#include "bgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bgnn/error.hpp"

namespace bgnn {

SparseAdjacency::SparseAdjacency(std::size_t num_nodes, std::vector<std::size_t> row_ptr,
                                 std::vector<NodeId> col_idx,
                                 std::optional<std::vector<double>> values)
    : num_nodes_(num_nodes),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != num_nodes_ + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != col_idx_.size()) {
    throw GraphError("row_ptr must have num_nodes+1 entries from 0 to nnz");
  }
  if (values_ && values_->size() != col_idx_.size()) {
    throw GraphError("values length must equal nnz");
  }
  for (std::size_t v = 0; v < num_nodes_; ++v) {
    if (row_ptr_[v] > row_ptr_[v + 1]) throw GraphError("row_ptr not monotone");
    for (std::size_t k = row_ptr_[v]; k < row_ptr_[v + 1]; ++k) {
      if (col_idx_[k] >= num_nodes_) {
        throw GraphError("column index " + std::to_string(col_idx_[k]) + " out of range in row " +
                         std::to_string(v));
      }
      if (k > row_ptr_[v] && col_idx_[k] <= col_idx_[k - 1]) {
        throw GraphError("row " + std::to_string(v) +
                         " has unsorted or duplicate column indices");
      }
    }
  }
}

SparseAdjacency SparseAdjacency::from_edges(std::size_t num_nodes, std::span<const Edge> edges) {
  if (num_nodes > std::numeric_limits<NodeId>::max()) throw GraphError("too many nodes");
  std::vector<std::size_t> counts(num_nodes + 1, 0);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw GraphError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") references a node outside [0," + std::to_string(num_nodes) + ")");
    }
    if (u == v) throw GraphError("self-loop on node " + std::to_string(u));
    ++counts[u + 1];
    ++counts[v + 1];
  }
  for (std::size_t v = 0; v < num_nodes; ++v) counts[v + 1] += counts[v];
  std::vector<NodeId> cols(counts.back());
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  for (const auto& [u, v] : edges) {
    cols[cursor[u]++] = v;
    cols[cursor[v]++] = u;
  }
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto first = cols.begin() + static_cast<std::ptrdiff_t>(counts[v]);
    auto last = cols.begin() + static_cast<std::ptrdiff_t>(counts[v + 1]);
    std::sort(first, last);
    auto dup = std::adjacent_find(first, last);
    if (dup != last) {
      throw GraphError("duplicate edge (" + std::to_string(std::min<std::size_t>(v, *dup)) + "," +
                       std::to_string(std::max<std::size_t>(v, *dup)) + ")");
    }
  }
  return SparseAdjacency(num_nodes, std::move(counts), std::move(cols));
}

std::span<const double> SparseAdjacency::values() const {
  if (!values_) return {};
  return *values_;
}

bool SparseAdjacency::contains(std::size_t v, std::size_t i) const {
  auto r = row(v);
  return std::binary_search(r.begin(), r.end(), static_cast<NodeId>(i));
}

bool SparseAdjacency::has_diagonal_entries() const {
  for (std::size_t v = 0; v < num_nodes_; ++v)
    if (contains(v, v)) return true;
  return false;
}

bool SparseAdjacency::is_structurally_symmetric() const {
  for (std::size_t v = 0; v < num_nodes_; ++v)
    for (NodeId i : row(v))
      if (!contains(i, v)) return false;
  return true;
}

bool SparseAdjacency::has_symmetric_values() const {
  for (std::size_t v = 0; v < num_nodes_; ++v) {
    for (std::size_t k = row_ptr_[v]; k < row_ptr_[v + 1]; ++k) {
      const NodeId i = col_idx_[k];
      auto r = row(i);
      auto it = std::lower_bound(r.begin(), r.end(), static_cast<NodeId>(v));
      if (it == r.end() || *it != v) return false;
      const std::size_t back = row_ptr_[i] + static_cast<std::size_t>(it - r.begin());
      if (value(k) != value(back)) return false;
    }
  }
  return true;
}

std::vector<Edge> SparseAdjacency::edges() const {
  std::vector<Edge> out;
  for (std::size_t v = 0; v < num_nodes_; ++v)
    for (NodeId i : row(v))
      if (v < i) out.emplace_back(static_cast<NodeId>(v), i);
  return out;
}

SparseAdjacency add_self_loops(const SparseAdjacency& adj) {
  const std::size_t n = adj.num_nodes();
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<NodeId> cols;
  cols.reserve(adj.nnz() + n);
  for (std::size_t v = 0; v < n; ++v) {
    bool placed = false;
    for (NodeId i : adj.row(v)) {
      if (i == v) {
        throw GraphError("add_self_loops: node " + std::to_string(v) + " already has a self-loop");
      }
      if (!placed && i > v) {
        cols.push_back(static_cast<NodeId>(v));
        placed = true;
      }
      cols.push_back(i);
    }
    if (!placed) cols.push_back(static_cast<NodeId>(v));
    row_ptr[v + 1] = cols.size();
  }
  return SparseAdjacency(n, std::move(row_ptr), std::move(cols));
}

SparseAdjacency remove_self_loops(const SparseAdjacency& adj) {
  const std::size_t n = adj.num_nodes();
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<NodeId> cols;
  std::vector<double> vals;
  cols.reserve(adj.nnz());
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = adj.row_ptr()[v]; k < adj.row_ptr()[v + 1]; ++k) {
      const NodeId i = adj.col_idx()[k];
      if (i == v) continue;
      cols.push_back(i);
      if (adj.weighted()) vals.push_back(adj.value(k));
    }
    row_ptr[v + 1] = cols.size();
  }
  if (adj.weighted()) return SparseAdjacency(n, std::move(row_ptr), std::move(cols), std::move(vals));
  return SparseAdjacency(n, std::move(row_ptr), std::move(cols));
}

SparseAdjacency gcn_normalize(const SparseAdjacency& adj_with_loops) {
  const std::size_t n = adj_with_loops.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t d = adj_with_loops.row_length(v);
    if (d == 0) throw GraphError("gcn_normalize: node " + std::to_string(v) + " has no self-loop");
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  std::vector<double> vals(adj_with_loops.nnz());
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = adj_with_loops.row_ptr()[v]; k < adj_with_loops.row_ptr()[v + 1]; ++k) {
      vals[k] = inv_sqrt[v] * inv_sqrt[adj_with_loops.col_idx()[k]];
    }
  }
  std::vector<std::size_t> row_ptr(adj_with_loops.row_ptr().begin(), adj_with_loops.row_ptr().end());
  std::vector<NodeId> cols(adj_with_loops.col_idx().begin(), adj_with_loops.col_idx().end());
  return SparseAdjacency(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseAdjacency boolean_product(const SparseAdjacency& a, const SparseAdjacency& b) {
  if (a.num_nodes() != b.num_nodes()) throw GraphError("boolean_product: size mismatch");
  const std::size_t n = a.num_nodes();
  constexpr std::size_t kUnmarked = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> marker(n, kUnmarked);
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<NodeId> cols;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t begin = cols.size();
    for (NodeId i : a.row(v)) {
      for (NodeId j : b.row(i)) {
        if (marker[j] != v) {
          marker[j] = v;
          cols.push_back(j);
        }
      }
    }
    std::sort(cols.begin() + static_cast<std::ptrdiff_t>(begin), cols.end());
    row_ptr[v + 1] = cols.size();
  }
  return SparseAdjacency(n, std::move(row_ptr), std::move(cols));
}

SparseAdjacency structural_union(const SparseAdjacency& a, const SparseAdjacency& b) {
  if (a.num_nodes() != b.num_nodes()) throw GraphError("structural_union: size mismatch");
  const std::size_t n = a.num_nodes();
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<NodeId> cols;
  cols.reserve(a.nnz() + b.nnz());
  for (std::size_t v = 0; v < n; ++v) {
    auto ra = a.row(v);
    auto rb = b.row(v);
    std::set_union(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(cols));
    row_ptr[v + 1] = cols.size();
  }
  return SparseAdjacency(n, std::move(row_ptr), std::move(cols));
}

namespace {

SparseAdjacency structure_only(const SparseAdjacency& adj) {
  std::vector<std::size_t> row_ptr(adj.row_ptr().begin(), adj.row_ptr().end());
  std::vector<NodeId> cols(adj.col_idx().begin(), adj.col_idx().end());
  return SparseAdjacency(adj.num_nodes(), std::move(row_ptr), std::move(cols));
}

}  // namespace

SparseAdjacency khop_binarize(const SparseAdjacency& adj, std::size_t k, HopMode mode) {
  if (k == 0) throw GraphError("khop_binarize: k must be at least 1");
  const SparseAdjacency base = structure_only(adj);
  if (k == 1) return base;
  SparseAdjacency power = base;
  SparseAdjacency reach = base;
  for (std::size_t step = 2; step <= k; ++step) {
    power = boolean_product(power, base);
    if (mode == HopMode::WithinK) reach = structural_union(reach, power);
  }
  return remove_self_loops(mode == HopMode::WithinK ? reach : power);
}

DegreeVector extended_degrees(const SparseAdjacency& adj_with_loops) {
  DegreeVector d(adj_with_loops.num_nodes());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = adj_with_loops.row_length(v);
  return d;
}

InteractionCounts interaction_counts(const SparseAdjacency& adj_with_loops) {
  const std::size_t n = adj_with_loops.num_nodes();
  InteractionCounts out{std::vector<double>(n), std::vector<std::uint8_t>(n)};
  for (std::size_t v = 0; v < n; ++v) {
    const double d = static_cast<double>(adj_with_loops.row_length(v));
    out.pairs[v] = 0.5 * d * (d - 1.0);
    out.isolated[v] = out.pairs[v] == 0.0 ? 1 : 0;
  }
  return out;
}

SparseAdjacency permute(const SparseAdjacency& adj, std::span<const NodeId> perm) {
  const std::size_t n = adj.num_nodes();
  if (perm.size() != n) throw GraphError("permute: permutation length mismatch");
  std::vector<NodeId> inverse(n);
  std::vector<std::uint8_t> seen(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (perm[v] >= n || seen[perm[v]]) throw GraphError("permute: not a permutation");
    seen[perm[v]] = 1;
    inverse[perm[v]] = static_cast<NodeId>(v);
  }
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<NodeId> cols;
  std::vector<double> vals;
  cols.reserve(adj.nnz());
  std::vector<std::pair<NodeId, double>> scratch;
  for (std::size_t nv = 0; nv < n; ++nv) {
    const NodeId old = inverse[nv];
    scratch.clear();
    for (std::size_t k = adj.row_ptr()[old]; k < adj.row_ptr()[old + 1]; ++k) {
      scratch.emplace_back(perm[adj.col_idx()[k]], adj.value(k));
    }
    std::sort(scratch.begin(), scratch.end());
    for (const auto& [c, val] : scratch) {
      cols.push_back(c);
      vals.push_back(val);
    }
    row_ptr[nv + 1] = cols.size();
  }
  if (adj.weighted()) return SparseAdjacency(n, std::move(row_ptr), std::move(cols), std::move(vals));
  return SparseAdjacency(n, std::move(row_ptr), std::move(cols));
}

}  // namespace bgnn
