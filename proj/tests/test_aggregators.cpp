#include <doctest.h>

#include <cmath>

#include "bgnn/aggregators.hpp"
#include "bgnn/gradcheck.hpp"
#include "bgnn/ops.hpp"
#include "bgnn/synthetic.hpp"
#include "support.hpp"

using namespace bgnn;

namespace {

Matrix fast(const Matrix& h, const SparseAdjacency& adj, const Matrix& w, BilinearScope scope) {
  Tape t;
  return bilinear_fast(t.leaf(h), adj, t.leaf(w), scope).value();
}

// Star around node 0: N~(0) = {0, 1, 2}.
SparseAdjacency star3() {
  const Edge e[] = {{0, 1}, {0, 2}};
  return add_self_loops(SparseAdjacency::from_edges(3, e));
}

}  // namespace

TEST_CASE("single pair is the element-wise product") {
  const Edge e[] = {{0, 1}};
  const auto adj = add_self_loops(SparseAdjacency::from_edges(2, e));
  const Matrix s{{1, 2}, {3, 4}};
  const Matrix naive = bilinear_naive(s, adj, BilinearScope::AllPairs);
  CHECK(naive(0, 0) == 3.0);
  CHECK(naive(0, 1) == 8.0);
  CHECK(fast(s, adj, Matrix::identity(2), BilinearScope::AllPairs) == naive);
}

TEST_CASE("three-node neighborhood by hand") {
  const Matrix s{{1, 0}, {2, 1}, {0, 3}};
  const Matrix naive = bilinear_naive(s, star3(), BilinearScope::AllPairs);
  CHECK(naive(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(naive(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  const Matrix f = fast(s, star3(), Matrix::identity(2), BilinearScope::AllPairs);
  CHECK(max_abs_diff(f, naive) < 1e-15);
}

TEST_CASE("target-only scope by hand") {
  // Node 0 pairs with 1 and 2: ((1,0).*(2,1) + (1,0).*(0,3)) / 2 = (1, 0).
  const Matrix s{{1, 0}, {2, 1}, {0, 3}};
  const Matrix naive = bilinear_naive(s, star3(), BilinearScope::TargetOnly);
  CHECK(naive(0, 0) == 1.0);
  CHECK(naive(0, 1) == 0.0);
  // Node 1 has one neighbor: s_1 .* s_0.
  CHECK(naive(1, 0) == 2.0);
  CHECK(fast(s, star3(), Matrix::identity(2), BilinearScope::TargetOnly) == naive);
}

TEST_CASE("isolated nodes give zero rows in both scopes") {
  const auto adj = add_self_loops(SparseAdjacency::from_edges(2, {}));
  const Matrix s{{1, 2}, {3, 4}};
  for (auto scope : {BilinearScope::AllPairs, BilinearScope::TargetOnly}) {
    CHECK(bilinear_naive(s, adj, scope) == Matrix(2, 2));
    CHECK(fast(s, adj, Matrix::identity(2), scope) == Matrix(2, 2));
  }
}

TEST_CASE("naive aggregator agrees with the definition written independently") {
  Rng rng = make_rng(30, Stream::Synthetic);
  for (int t = 0; t < 20; ++t) {
    const auto adj = add_self_loops(random_graph(15, 4.0, rng));
    const Matrix s = random_matrix(15, 3, rng);
    const Matrix dense = test::to_dense(adj);
    CHECK(max_abs_diff(bilinear_naive(s, adj, BilinearScope::AllPairs),
                       test::pairwise_bilinear(s, dense, false)) < 1e-12);
    CHECK(max_abs_diff(bilinear_naive(s, adj, BilinearScope::TargetOnly),
                       test::pairwise_bilinear(s, dense, true)) < 1e-12);
  }
}

TEST_CASE("fast aggregator equals the pairwise oracle on random graphs") {
  Rng rng = make_rng(31, Stream::Synthetic);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 49;
    const std::size_t d = 1 + t % 8;
    const auto a = random_graph(n, 1.0 + t % 6, rng);
    const Matrix h = random_matrix(n, d, rng);
    const Matrix w = random_matrix(d, d, rng);
    const Matrix s = test::dense_product(h, w);
    for (std::size_t k : {1, 2}) {
      const auto adj = add_self_loops(khop_binarize(a, k));
      for (auto scope : {BilinearScope::AllPairs, BilinearScope::TargetOnly}) {
        worst = std::max(worst, max_abs_diff(fast(h, adj, w, scope), bilinear_naive(s, adj, scope)));
      }
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("bilinear gradients in H and W") {
  Rng rng = make_rng(32, Stream::Synthetic);
  const auto adj = add_self_loops(random_graph(8, 3.0, rng));
  const Matrix weights = random_matrix(8, 3, rng);
  for (auto scope : {BilinearScope::AllPairs, BilinearScope::TargetOnly}) {
    const Matrix inputs[] = {random_matrix(8, 4, rng), random_matrix(4, 3, rng)};
    const ScalarFunction f = [&](Tape& t, std::span<const Var> in) {
      return sum(hadamard(bilinear_fast(in[0], adj, in[1], scope), t.constant(weights)));
    };
    CHECK(gradcheck(f, inputs).max_rel_error < 1e-6);
  }
}

TEST_CASE("common signal survives, opposite signs turn negative") {
  const Edge e[] = {{0, 1}, {0, 2}};
  const auto adj = add_self_loops(SparseAdjacency::from_edges(3, e));
  // Node 0 carries no signal; its two neighbors agree on coordinate 0 and
  // disagree on coordinate 1.
  const Matrix s{{0, 0}, {2, 1}, {2, -1}};
  const Matrix out = bilinear_naive(s, adj, BilinearScope::AllPairs);
  CHECK(out(0, 0) > 0.0);
  CHECK(out(0, 1) < 0.0);
  CHECK(max_abs_diff(fast(s, adj, Matrix::identity(2), BilinearScope::AllPairs), out) < 1e-15);
}

TEST_CASE("GCN aggregation matches the dense normalized product") {
  Rng rng = make_rng(33, Stream::Synthetic);
  const auto a = random_graph(8, 3.0, rng);
  const Matrix h = random_matrix(8, 4, rng);
  const Matrix w = random_matrix(4, 3, rng);
  Matrix dense = test::to_dense(add_self_loops(a));
  std::vector<double> deg(8, 0.0);
  for (std::size_t v = 0; v < 8; ++v)
    for (std::size_t i = 0; i < 8; ++i) deg[v] += dense(v, i);
  for (std::size_t v = 0; v < 8; ++v)
    for (std::size_t i = 0; i < 8; ++i) dense(v, i) /= std::sqrt(deg[v] * deg[i]);
  const Matrix want = test::dense_product(dense, test::dense_product(h, w));
  Tape t;
  const Matrix got = linear_agg_gcn(t.leaf(h), gcn_normalize(add_self_loops(a)), t.leaf(w)).value();
  CHECK(max_abs_diff(got, want) < 1e-12);
}

TEST_CASE("GCN on a single edge and an isolated node") {
  const Edge e[] = {{0, 1}};
  const auto norm = gcn_normalize(add_self_loops(SparseAdjacency::from_edges(3, e)));
  const Matrix h{{2, 0}, {0, 4}, {5, 7}};
  Tape t;
  const Matrix out = linear_agg_gcn(t.leaf(h), norm, t.leaf(Matrix::identity(2))).value();
  CHECK(out(0, 0) == doctest::Approx(1.0));
  CHECK(out(0, 1) == doctest::Approx(2.0));
  CHECK(out(2, 0) == 5.0);
  CHECK(out(2, 1) == 7.0);
}

TEST_CASE("GAT with a zero attention vector averages the neighborhood") {
  Rng rng = make_rng(34, Stream::Synthetic);
  const auto adj = add_self_loops(random_graph(10, 3.0, rng));
  const Matrix h = random_matrix(10, 3, rng);
  Tape t;
  const Var att = t.leaf(Matrix(1, 6));
  const Matrix out =
      linear_agg_gat(t.leaf(h), adj, t.leaf(Matrix::identity(3)), {att, 0.2}).value();
  const Matrix dense = test::to_dense(adj);
  for (std::size_t v = 0; v < 10; ++v) {
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0, cnt = 0.0;
      for (std::size_t i = 0; i < 10; ++i) {
        if (dense(v, i) != 0.0) {
          s += h(i, c);
          cnt += 1.0;
        }
      }
      CHECK(out(v, c) == doctest::Approx(s / cnt).epsilon(1e-13));
    }
  }
}

TEST_CASE("GAT on an isolated node returns its own transform") {
  const auto adj = add_self_loops(SparseAdjacency::from_edges(2, {}));
  Rng rng = make_rng(35, Stream::Synthetic);
  const Matrix h = random_matrix(2, 3, rng);
  const Matrix w = random_matrix(3, 2, rng);
  Tape t;
  const Matrix out =
      linear_agg_gat(t.leaf(h), adj, t.leaf(w), {t.leaf(random_matrix(1, 4, rng)), 0.2}).value();
  CHECK(max_abs_diff(out, test::dense_product(h, w)) < 1e-15);
}

TEST_CASE("GAT coefficients form a softmax per row") {
  Rng rng = make_rng(36, Stream::Synthetic);
  for (int t = 0; t < 10; ++t) {
    const auto adj = add_self_loops(random_graph(20, 4.0, rng));
    const Matrix s = random_matrix(20, 3, rng, -3, 3);
    const Matrix att = random_matrix(1, 6, rng, -2, 2);
    const auto c = attention_coefficients(s, adj, att, 0.2);
    const auto rp = adj.row_ptr();
    const auto ci = adj.col_idx();
    for (std::size_t v = 0; v < 20; ++v) {
      double total = 0.0;
      // Independent softmax of the leaky scores.
      std::vector<double> e;
      for (std::size_t k = rp[v]; k < rp[v + 1]; ++k) {
        double z = 0.0;
        for (std::size_t j = 0; j < 3; ++j) z += att(0, j) * s(v, j) + att(0, 3 + j) * s(ci[k], j);
        e.push_back(z > 0 ? z : 0.2 * z);
      }
      double denom = 0.0;
      for (double z : e) denom += std::exp(z);
      for (std::size_t k = rp[v]; k < rp[v + 1]; ++k) {
        CHECK(c[k] >= 0.0);
        CHECK(c[k] == doctest::Approx(std::exp(e[k - rp[v]]) / denom).epsilon(1e-12));
        total += c[k];
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("aggregators commute with node relabeling") {
  Rng rng = make_rng(37, Stream::Synthetic);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_graph(16, 3.0, rng);
    const auto perm = random_permutation(16, rng);
    const auto pa = permute(a, perm);
    const Matrix h = random_matrix(16, 4, rng);
    const Matrix ph = test::permute_rows(h, perm);
    const Matrix w = random_matrix(4, 3, rng);
    const Matrix att = random_matrix(1, 6, rng);
    Tape tp;
    for (auto scope : {BilinearScope::AllPairs, BilinearScope::TargetOnly}) {
      const Matrix base = fast(h, add_self_loops(a), w, scope);
      CHECK(max_abs_diff(fast(ph, add_self_loops(pa), w, scope), test::permute_rows(base, perm)) <
            1e-10);
    }
    const Matrix g = linear_agg_gcn(tp.leaf(h), gcn_normalize(add_self_loops(a)), tp.leaf(w)).value();
    const Matrix pg =
        linear_agg_gcn(tp.leaf(ph), gcn_normalize(add_self_loops(pa)), tp.leaf(w)).value();
    CHECK(max_abs_diff(pg, test::permute_rows(g, perm)) < 1e-10);
    const Matrix at =
        linear_agg_gat(tp.leaf(h), add_self_loops(a), tp.leaf(w), {tp.leaf(att), 0.2}).value();
    const Matrix pat =
        linear_agg_gat(tp.leaf(ph), add_self_loops(pa), tp.leaf(w), {tp.leaf(att), 0.2}).value();
    CHECK(max_abs_diff(pat, test::permute_rows(at, perm)) < 1e-10);
  }
}

TEST_CASE("row scales") {
  const auto adj = star3();
  const auto all = bilinear_row_scale(adj, BilinearScope::AllPairs);
  CHECK(all[0] == doctest::Approx(1.0 / 3.0));
  CHECK(all[1] == 1.0);
  const auto target = bilinear_row_scale(adj, BilinearScope::TargetOnly);
  CHECK(target[0] == 0.5);
  CHECK(target[2] == 1.0);
}
