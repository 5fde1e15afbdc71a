#include "bgnn/aggregators.hpp"

#include "bgnn/error.hpp"
#include "bgnn/ops.hpp"

namespace bgnn {

Var linear_agg_gcn(Var h, const SparseAdjacency& norm_adj, Var w) {
  return spmm(norm_adj, matmul(h, w));
}

Var linear_agg_gat(Var h, const SparseAdjacency& adj_with_loops, Var w,
                   const AttentionParams& att) {
  return attention_aggregate(matmul(h, w), adj_with_loops, att.vector, att.slope);
}

std::vector<double> bilinear_row_scale(const SparseAdjacency& adj_with_loops,
                                       BilinearScope scope) {
  std::vector<double> out(adj_with_loops.num_nodes(), 0.0);
  if (scope == BilinearScope::AllPairs) {
    const InteractionCounts counts = interaction_counts(adj_with_loops);
    for (std::size_t v = 0; v < out.size(); ++v)
      out[v] = counts.isolated[v] ? 0.0 : 1.0 / counts.pairs[v];
  } else {
    for (std::size_t v = 0; v < out.size(); ++v) {
      const std::size_t len = adj_with_loops.row_length(v);
      out[v] = len > 1 ? 1.0 / static_cast<double>(len - 1) : 0.0;
    }
  }
  return out;
}

Matrix bilinear_naive(const Matrix& s, const SparseAdjacency& adj_with_loops,
                      BilinearScope scope) {
  if (adj_with_loops.num_nodes() != s.rows()) {
    throw ShapeError("bilinear_naive: adjacency on " + std::to_string(adj_with_loops.num_nodes()) +
                     " nodes vs " + s.shape_string());
  }
  const std::size_t d = s.cols();
  Matrix out(s.rows(), d);
  for (std::size_t v = 0; v < s.rows(); ++v) {
    auto nbrs = adj_with_loops.row(v);
    auto dst = out.row(v);
    std::size_t pairs = 0;
    if (scope == BilinearScope::AllPairs) {
      for (std::size_t a = 0; a < nbrs.size(); ++a) {
        for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
          auto si = s.row(nbrs[a]);
          auto sj = s.row(nbrs[b]);
          for (std::size_t j = 0; j < d; ++j) dst[j] += si[j] * sj[j];
          ++pairs;
        }
      }
    } else {
      auto sv = s.row(v);
      for (NodeId i : nbrs) {
        if (i == v) continue;
        auto si = s.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += sv[j] * si[j];
        ++pairs;
      }
    }
    if (pairs == 0) continue;
    const double inv = 1.0 / static_cast<double>(pairs);
    for (double& e : dst) e *= inv;
  }
  return out;
}

Var bilinear_naive(Var h, const SparseAdjacency& adj_with_loops, Var w, BilinearScope scope) {
  const Matrix s = bgnn::matmul(h.value(), w.value());
  return h.tape().constant(bilinear_naive(s, adj_with_loops, scope));
}

Var bilinear_fast(Var h, const SparseAdjacency& adj_with_loops, Var w, BilinearScope scope) {
  const Var s = matmul(h, w);
  if (adj_with_loops.num_nodes() != s.rows()) {
    throw ShapeError("bilinear_fast: adjacency on " + std::to_string(adj_with_loops.num_nodes()) +
                     " nodes vs " + s.value().shape_string());
  }
  const std::vector<double> scale = bilinear_row_scale(adj_with_loops, scope);
  if (scope == BilinearScope::AllPairs) {
    return pair_interactions(s, adj_with_loops, scale);
  }
  const Var neighbor_sum = add_scaled(spmm(adj_with_loops, s), s, 1.0, -1.0);
  return row_scale(hadamard(s, neighbor_sum), scale);
}

}  // namespace bgnn
