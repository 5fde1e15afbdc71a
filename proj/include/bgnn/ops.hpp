#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bgnn/graph.hpp"
#include "bgnn/random.hpp"
#include "bgnn/tape.hpp"

namespace bgnn {

// Differentiable operations. Every op records onto the tape of its first
// Var argument. Sparse adjacency arguments are captured by reference and
// must outlive the tape.

Var matmul(Var a, Var b);
// out[v] = sum_i value(v,i) * dense[i]; backward scatters through A^T.
Var spmm(const SparseAdjacency& adj, Var dense);
Var hadamard(Var a, Var b);
Var square(Var a);
// out[v] = s[v] * a[v]
Var row_scale(Var a, std::span<const double> s);
// wa * a + wb * b
Var add_scaled(Var a, Var b, double wa, double wb);
Var scale(Var a, double w);

Var relu(Var a);
Var elu(Var a, double alpha = 1.0);
Var leaky_relu(Var a, double slope);
// Row-wise, stabilized by subtracting the row max.
Var log_softmax(Var a);

// 1x1 sum of all entries / of squared entries.
Var sum(Var a);
Var sum_squares(Var a);

// Mean over `mask` of -log_softmax(logits)[v, labels[v]]. Throws on an
// empty mask or a label outside [0, logits.cols()).
Var masked_cross_entropy(Var logits, std::span<const std::int32_t> labels,
                         std::span<const NodeId> mask);

// Inverted dropout: in training, zero each entry with probability `rate`
// and scale survivors by 1/(1-rate). Identity when !training or rate == 0.
// Entries that are already zero consume no random draws.
Var dropout(Var a, double rate, Rng& rng, bool training);

// Fused pairwise-interaction sum over the stored entries of `adj`:
//   out_v = c_v / 2 ((sum_i a_vi s_i)^2 - sum_i a_vi s_i^2)
// in a single gather pass per row.
Var pair_interactions(Var s, const SparseAdjacency& adj, std::span<const double> c);

// Single-head graph attention over the stored entries of `adj_with_loops`:
//   e_vi = leaky_relu(att[:D] . s_v + att[D:] . s_i),
//   c_vi = softmax over row v of e_vi,
//   out_v = sum_i c_vi s_i.
// `att` is 1 x 2D.
Var attention_aggregate(Var s, const SparseAdjacency& adj_with_loops, Var att, double slope);

// Softmax coefficients c_vi of attention_aggregate, one per stored entry.
std::vector<double> attention_coefficients(const Matrix& s, const SparseAdjacency& adj_with_loops,
                                           const Matrix& att, double slope);

}  // namespace bgnn
