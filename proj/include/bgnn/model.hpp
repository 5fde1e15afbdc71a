#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bgnn/aggregators.hpp"
#include "bgnn/graph.hpp"
#include "bgnn/matrix.hpp"
#include "bgnn/random.hpp"
#include "bgnn/tape.hpp"

namespace bgnn {

enum class Variant { GCN, GAT, BGCN_A, BGCN_T, BGAT_A, BGAT_T };

inline constexpr Variant kAllVariants[] = {Variant::GCN,    Variant::GAT,    Variant::BGCN_A,
                                           Variant::BGCN_T, Variant::BGAT_A, Variant::BGAT_T};

std::string_view to_string(Variant v);
// Accepts "gcn", "bgcn-t", "BGAT_A", ... (case-insensitive, '-' or '_').
Variant parse_variant(std::string_view name);

bool uses_attention(Variant v);
bool has_bilinear_path(Variant v);
BilinearScope bilinear_scope(Variant v);
// 16 for the GCN family, 8 for the GAT family.
std::size_t default_hidden_dim(Variant v);

struct ModelConfig {
  Variant variant = Variant::BGCN_T;
  std::size_t layers = 2;
  std::size_t hidden_dim = 16;
  // Weight of the bilinear path. Plain GCN/GAT have no bilinear path and
  // ignore alpha and beta.
  double alpha = 0.0;
  // Per-hop mixing weights of the bilinear terms; length == layers, sums to 1.
  std::vector<double> beta{0.5, 0.5};
  double dropout = 0.5;
  double weight_decay = 5e-4;
  double learning_rate = 0.01;
  std::size_t max_epochs = 2000;
  std::size_t patience = 100;
  std::uint64_t seed = 0;
  // Bilinear path reuses the first GNN weight (1-layer models only).
  bool share_weights = false;
  HopMode hop_mode = HopMode::ExactWalk;
  double attention_slope = 0.2;
};

// beta vector for a 2-layer model from the scalar trade-off b: (1-b, b).
std::vector<double> two_hop_beta(double b);
// Throws ConfigError on any violated invariant.
void validate(const ModelConfig& cfg);

struct ModelDims {
  std::size_t features = 0;
  std::size_t classes = 0;
};

struct Parameter {
  std::string name;
  Matrix value;
  bool decay = true;  // included in the L2 penalty

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct ModelState {
  std::vector<Parameter> params;

  const Parameter* find(std::string_view name) const;
  std::size_t scalar_count() const;
  bool all_finite() const;
  friend bool operator==(const ModelState&, const ModelState&) = default;
};

// Glorot-uniform initialization of every parameter from the Init stream.
ModelState init_params(const ModelConfig& cfg, const ModelDims& dims, Rng& rng);
ModelState init_params(const ModelConfig& cfg, const ModelDims& dims);
// Analytical count: sum_l in_l*out_l (+ 2*out_l per attention layer)
// (+ layers*F*C for the per-hop bilinear transforms unless shared).
std::size_t parameter_count(const ModelConfig& cfg, const ModelDims& dims);

// Read-only graph operators derived once from A and shared across runs.
struct GraphOperators {
  SparseAdjacency adjacency;                   // A
  SparseAdjacency with_loops;                  // A + I
  SparseAdjacency gcn_norm;                    // normalized A + I
  std::vector<SparseAdjacency> hop_with_loops; // A^(k) + I for k = 1..hops

  const SparseAdjacency& hop(std::size_t k) const { return hop_with_loops.at(k - 1); }
};

GraphOperators build_graph_operators(const SparseAdjacency& adjacency, std::size_t hops,
                                     HopMode mode = HopMode::ExactWalk);

struct ForwardOptions {
  bool training = false;
  Rng* dropout_rng = nullptr;  // required when training with dropout > 0
  // Existing tape variables to use as the parameters, parallel to
  // ModelState::params. Empty: fresh leaves are created from the state.
  std::span<const Var> bound_params;
};

struct ForwardResult {
  Var logits;
  std::vector<Var> params;  // parallel to ModelState::params
};

// (1-alpha) GNN_K(X, A) + alpha sum_k beta_k BA(X, A^(k)). The GNN stack
// applies dropout before every layer and the activation (ReLU for GCN,
// ELU for GAT) between layers; every bilinear term reads dropped-out raw X.
ForwardResult forward(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                      const GraphOperators& graph, const Matrix& features,
                      const ForwardOptions& options = {});
// Depth-checked entry points of forward().
ForwardResult forward_1layer(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                             const GraphOperators& graph, const Matrix& features,
                             const ForwardOptions& options = {});
ForwardResult forward_2layer(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                             const GraphOperators& graph, const Matrix& features,
                             const ForwardOptions& options = {});
ForwardResult forward_klayer(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                             const GraphOperators& graph, const Matrix& features,
                             const ForwardOptions& options = {});

// Inference logits (dropout off).
Matrix predict_logits(const ModelConfig& cfg, const ModelState& state,
                      const GraphOperators& graph, const Matrix& features);

// lambda * sum of squared entries over decayed parameters.
Var l2_penalty(const ModelState& state, std::span<const Var> params, double lambda);

}  // namespace bgnn
