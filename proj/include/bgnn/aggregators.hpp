#pragma once

#include <vector>

#include "bgnn/graph.hpp"
#include "bgnn/matrix.hpp"
#include "bgnn/tape.hpp"

namespace bgnn {

// Which neighbor pairs the bilinear aggregator multiplies.
enum class BilinearScope {
  AllPairs,    // every unordered pair i<j of the extended neighborhood
  TargetOnly,  // only pairs (v, i) with i a direct neighbor of the target v
};

struct AttentionParams {
  Var vector;          // 1 x 2D
  double slope = 0.2;  // leaky-relu slope on edge scores
};

// sum_i a_vi h_i W with a_vi = 1/sqrt(d~_v d~_i); `norm_adj` from gcn_normalize.
Var linear_agg_gcn(Var h, const SparseAdjacency& norm_adj, Var w);

// sum_i c_vi h_i W with c_vi a softmax over the extended neighborhood of
// learned edge scores.
Var linear_agg_gat(Var h, const SparseAdjacency& adj_with_loops, Var w,
                   const AttentionParams& att);

// Per-row normalizers: 1/b_v for AllPairs, 1/d_v for TargetOnly, with 0
// where the row has no pair (isolated node).
std::vector<double> bilinear_row_scale(const SparseAdjacency& adj_with_loops,
                                       BilinearScope scope);

// Pairwise reference: enumerates every pair explicitly, O(sum d~_v^2 D).
// `s` is the transformed representation H W.
Matrix bilinear_naive(const Matrix& s, const SparseAdjacency& adj_with_loops,
                      BilinearScope scope);
// Tape wrapper around the pairwise reference. The result is recorded as a
// constant: this path carries no gradient.
Var bilinear_naive(Var h, const SparseAdjacency& adj_with_loops, Var w, BilinearScope scope);

// Linear-time bilinear aggregator.
//   AllPairs:   1/2 B^-1 ((A~ S)^2 - A~ (S^2)),      S = H W
//   TargetOnly: D^-1 (S .* (A~ S - S))
// where rows of isolated nodes are zero.
Var bilinear_fast(Var h, const SparseAdjacency& adj_with_loops, Var w, BilinearScope scope);

}  // namespace bgnn
