#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bgnn/graph.hpp"
#include "bgnn/matrix.hpp"

namespace bgnn {

std::vector<std::int32_t> argmax_rows(const Matrix& logits);

// Per node: number of distinct nodes within two hops (self excluded) and
// the fraction of them that share the node's label (0 for isolated nodes).
struct Neighborhood2 {
  std::vector<std::size_t> degree;
  std::vector<double> ratio;
};

Neighborhood2 two_hop_neighborhoods(const SparseAdjacency& adj,
                                    std::span<const std::int32_t> labels);

// Outcome of (baseline, model) on one node.
enum class Agreement { BothRight, BaselineOnly, ModelOnly, BothWrong };
inline constexpr Agreement kAllAgreements[] = {Agreement::BothRight, Agreement::BaselineOnly,
                                               Agreement::ModelOnly, Agreement::BothWrong};
// "right/right", "right/wrong", "wrong/right", "wrong/wrong" (baseline first).
std::string_view to_string(Agreement a);

struct CategoryStats {
  std::size_t count = 0;
  double mean_degree = 0.0;
  double mean_ratio = 0.0;
};

struct AgreementTable {
  std::array<CategoryStats, 4> rows;  // indexed by Agreement

  const CategoryStats& operator[](Agreement a) const { return rows[static_cast<std::size_t>(a)]; }
};

AgreementTable agreement_table(const SparseAdjacency& adj, std::span<const std::int32_t> labels,
                               std::span<const NodeId> nodes,
                               std::span<const std::int32_t> baseline_pred,
                               std::span<const std::int32_t> model_pred);

}  // namespace bgnn
