#include <doctest.h>

#include <set>

#include "bgnn/analysis.hpp"
#include "bgnn/diagnostics.hpp"
#include "bgnn/synthetic.hpp"
#include "support.hpp"

using namespace bgnn;

namespace {

// Brute force over the dense adjacency.
Neighborhood2 brute_neighborhoods(const SparseAdjacency& adj, std::span<const std::int32_t> labels) {
  const Matrix a = test::to_dense(adj);
  const std::size_t n = a.rows();
  Neighborhood2 r{std::vector<std::size_t>(n), std::vector<double>(n)};
  for (std::size_t v = 0; v < n; ++v) {
    std::set<std::size_t> reach;
    for (std::size_t u = 0; u < n; ++u) {
      if (a(v, u) == 0) continue;
      reach.insert(u);
      for (std::size_t w = 0; w < n; ++w)
        if (a(u, w) != 0) reach.insert(w);
    }
    reach.erase(v);
    std::size_t same = 0;
    for (std::size_t u : reach) same += labels[u] == labels[v];
    r.degree[v] = reach.size();
    r.ratio[v] = reach.empty() ? 0.0 : static_cast<double>(same) / reach.size();
  }
  return r;
}

}  // namespace

TEST_CASE("argmax takes the first maximum") {
  const Matrix m{{0, 2, 2}, {-1, -3, -2}, {5, 5, 5}};
  CHECK(argmax_rows(m) == std::vector<std::int32_t>{1, 0, 0});
}

TEST_CASE("two-hop neighborhoods on the tiny graph") {
  const GraphDataset d = tiny_dataset();
  const Neighborhood2 n = two_hop_neighborhoods(d.adjacency, d.labels);
  // Node 0 reaches 1, 2 directly and 3 through 2.
  CHECK(n.degree[0] == 3);
  CHECK(n.ratio[0] == doctest::Approx(2.0 / 3.0));
  CHECK(n.degree[2] == 5);
  CHECK(n.ratio[2] == doctest::Approx(0.4));
}

TEST_CASE("two-hop neighborhoods match brute force") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, Stream::Synthetic);
    SyntheticSpec spec;
    spec.num_nodes = 40;
    spec.num_features = 6;
    spec.mean_degree = 1.5;
    spec.train_per_class = 2;
    spec.val = 5;
    spec.test = 5;
    const GraphDataset d = synthetic_citation(spec, rng);
    const Neighborhood2 fast = two_hop_neighborhoods(d.adjacency, d.labels);
    const Neighborhood2 slow = brute_neighborhoods(d.adjacency, d.labels);
    CHECK(fast.degree == slow.degree);
    for (std::size_t v = 0; v < fast.ratio.size(); ++v)
      CHECK(fast.ratio[v] == doctest::Approx(slow.ratio[v]).epsilon(1e-12));
  }
}

TEST_CASE("agreement categories partition the nodes") {
  const GraphDataset d = tiny_dataset();
  const std::vector<NodeId> nodes{0, 1, 2, 3, 4, 5};
  const std::vector<std::int32_t> base{0, 1, 0, 1, 0, 0};
  const std::vector<std::int32_t> model{0, 0, 1, 1, 1, 0};
  const AgreementTable t = agreement_table(d.adjacency, d.labels, nodes, base, model);
  // labels 0 0 0 1 1 1
  CHECK(t[Agreement::BothRight].count == 2);     // 0, 3
  CHECK(t[Agreement::BaselineOnly].count == 1);  // 2
  CHECK(t[Agreement::ModelOnly].count == 2);     // 1, 4
  CHECK(t[Agreement::BothWrong].count == 1);     // 5
  std::size_t total = 0;
  for (Agreement a : kAllAgreements) total += t[a].count;
  CHECK(total == nodes.size());

  const Neighborhood2 n = two_hop_neighborhoods(d.adjacency, d.labels);
  CHECK(t[Agreement::BaselineOnly].mean_degree == doctest::Approx(n.degree[2]));
  CHECK(t[Agreement::BothRight].mean_ratio == doctest::Approx((n.ratio[0] + n.ratio[3]) / 2));
}

TEST_CASE("perfect predictions leave only right/right") {
  const GraphDataset d = tiny_dataset();
  const AgreementTable t =
      agreement_table(d.adjacency, d.labels, d.split.test, d.labels, d.labels);
  CHECK(t[Agreement::BothRight].count == d.split.test.size());
  CHECK(t[Agreement::BaselineOnly].count == 0);
  CHECK(t[Agreement::ModelOnly].count == 0);
  CHECK(t[Agreement::BothWrong].count == 0);
  CHECK(t[Agreement::BothWrong].mean_degree == 0.0);
  CHECK(to_string(Agreement::BaselineOnly) == "right/wrong");
}
