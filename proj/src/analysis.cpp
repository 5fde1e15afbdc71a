#include "bgnn/analysis.hpp"

#include <algorithm>

#include "bgnn/error.hpp"

namespace bgnn {

std::vector<std::int32_t> argmax_rows(const Matrix& logits) {
  std::vector<std::int32_t> pred(logits.rows());
  for (std::size_t v = 0; v < logits.rows(); ++v) {
    auto row = logits.row(v);
    pred[v] = static_cast<std::int32_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return pred;
}

Neighborhood2 two_hop_neighborhoods(const SparseAdjacency& adj,
                                    std::span<const std::int32_t> labels) {
  const std::size_t n = adj.num_nodes();
  if (labels.size() != n) throw ShapeError("two_hop_neighborhoods: label count mismatch");
  Neighborhood2 out;
  out.degree.assign(n, 0);
  out.ratio.assign(n, 0.0);
  std::vector<std::size_t> mark(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    mark[v] = v;
    std::size_t count = 0, same = 0;
    auto visit = [&](NodeId u) {
      if (mark[u] == v) return;
      mark[u] = v;
      ++count;
      if (labels[u] == labels[v]) ++same;
    };
    for (NodeId i : adj.row(v)) {
      visit(i);
      for (NodeId j : adj.row(i)) visit(j);
    }
    out.degree[v] = count;
    if (count > 0) out.ratio[v] = static_cast<double>(same) / static_cast<double>(count);
  }
  return out;
}

std::string_view to_string(Agreement a) {
  switch (a) {
    case Agreement::BothRight: return "right/right";
    case Agreement::BaselineOnly: return "right/wrong";
    case Agreement::ModelOnly: return "wrong/right";
    case Agreement::BothWrong: return "wrong/wrong";
  }
  return "?";
}

AgreementTable agreement_table(const SparseAdjacency& adj, std::span<const std::int32_t> labels,
                               std::span<const NodeId> nodes,
                               std::span<const std::int32_t> baseline_pred,
                               std::span<const std::int32_t> model_pred) {
  if (baseline_pred.size() != labels.size() || model_pred.size() != labels.size()) {
    throw ShapeError("agreement_table: prediction count mismatch");
  }
  const Neighborhood2 hood = two_hop_neighborhoods(adj, labels);
  AgreementTable table;
  for (NodeId v : nodes) {
    const bool b = baseline_pred[v] == labels[v];
    const bool m = model_pred[v] == labels[v];
    const Agreement a = b ? (m ? Agreement::BothRight : Agreement::BaselineOnly)
                          : (m ? Agreement::ModelOnly : Agreement::BothWrong);
    auto& row = table.rows[static_cast<std::size_t>(a)];
    ++row.count;
    row.mean_degree += static_cast<double>(hood.degree[v]);
    row.mean_ratio += hood.ratio[v];
  }
  for (auto& row : table.rows) {
    if (row.count == 0) continue;
    row.mean_degree /= static_cast<double>(row.count);
    row.mean_ratio /= static_cast<double>(row.count);
  }
  return table;
}

}  // namespace bgnn
