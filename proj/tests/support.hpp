#pragma once

#include <filesystem>
#include <vector>

#include "bgnn/graph.hpp"
#include "bgnn/matrix.hpp"

namespace bgnn::test {

inline std::filesystem::path data_dir() { return BGNN_TEST_DATA; }

// Dense copy of a sparse matrix (stored values, 1 for binary entries).
inline Matrix to_dense(const SparseAdjacency& a) {
  Matrix d(a.num_nodes(), a.num_nodes());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  for (std::size_t v = 0; v < a.num_nodes(); ++v) {
    for (std::size_t k = rp[v]; k < rp[v + 1]; ++k) d(v, ci[k]) = a.value(k);
  }
  return d;
}

// Textbook triple loop, independent of the library kernels.
inline Matrix dense_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// Row v of the result is row perm^-1(v) of m, so that result[perm[v]] = m[v].
inline Matrix permute_rows(const Matrix& m, const std::vector<NodeId>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t v = 0; v < m.rows(); ++v) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(perm[v], j) = m(v, j);
  }
  return out;
}

// Pairwise bilinear sum over a dense neighborhood mask, written from the
// definition: all unordered pairs i<j of N~(v), or (v,i) for i in N(v).
inline Matrix pairwise_bilinear(const Matrix& s, const Matrix& dense_with_loops, bool target_only) {
  const std::size_t n = s.rows(), d = s.cols();
  Matrix out(n, d);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> hood;
    for (std::size_t i = 0; i < n; ++i)
      if (dense_with_loops(v, i) != 0.0) hood.push_back(i);
    double pairs = 0.0;
    std::vector<double> acc(d, 0.0);
    for (std::size_t a = 0; a < hood.size(); ++a) {
      for (std::size_t b = a + 1; b < hood.size(); ++b) {
        const std::size_t i = hood[a], j = hood[b];
        if (target_only && i != v && j != v) continue;
        pairs += 1.0;
        for (std::size_t c = 0; c < d; ++c) acc[c] += s(i, c) * s(j, c);
      }
    }
    if (pairs == 0.0) continue;
    for (std::size_t c = 0; c < d; ++c) out(v, c) = acc[c] / pairs;
  }
  return out;
}

}  // namespace bgnn::test
