#include "bgnn/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "bgnn/error.hpp"
#include "bgnn/ops.hpp"

namespace bgnn {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::GCN: return "gcn";
    case Variant::GAT: return "gat";
    case Variant::BGCN_A: return "bgcn-a";
    case Variant::BGCN_T: return "bgcn-t";
    case Variant::BGAT_A: return "bgat-a";
    case Variant::BGAT_T: return "bgat-t";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  std::string key;
  for (char c : name) {
    key.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (Variant v : kAllVariants)
    if (key == to_string(v)) return v;
  throw ConfigError("unknown model variant '" + std::string(name) +
                    "' (expected gcn, gat, bgcn-a, bgcn-t, bgat-a, bgat-t)");
}

bool uses_attention(Variant v) {
  return v == Variant::GAT || v == Variant::BGAT_A || v == Variant::BGAT_T;
}

bool has_bilinear_path(Variant v) { return v != Variant::GCN && v != Variant::GAT; }

BilinearScope bilinear_scope(Variant v) {
  return (v == Variant::BGCN_A || v == Variant::BGAT_A) ? BilinearScope::AllPairs
                                                        : BilinearScope::TargetOnly;
}

std::size_t default_hidden_dim(Variant v) { return uses_attention(v) ? 8 : 16; }

std::vector<double> two_hop_beta(double b) { return {1.0 - b, b}; }

void validate(const ModelConfig& cfg) {
  if (cfg.layers < 1) throw ConfigError("layers must be at least 1");
  if (cfg.hidden_dim < 1) throw ConfigError("hidden_dim must be at least 1");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0,1], got " + std::to_string(cfg.alpha));
  }
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0,1), got " + std::to_string(cfg.dropout));
  }
  if (!(cfg.weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (has_bilinear_path(cfg.variant)) {
    if (cfg.beta.size() != cfg.layers) {
      throw ConfigError("beta has " + std::to_string(cfg.beta.size()) + " entries for " +
                        std::to_string(cfg.layers) + " layers");
    }
    double total = 0.0;
    for (double b : cfg.beta) {
      if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("beta entries must lie in [0,1]");
      total += b;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("beta must sum to 1, sums to " + std::to_string(total));
    }
    if (cfg.share_weights && cfg.layers != 1) {
      throw ConfigError("share_weights requires a 1-layer model");
    }
  }
}

const Parameter* ModelState::find(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

std::size_t ModelState::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

bool ModelState::all_finite() const {
  return std::all_of(params.begin(), params.end(),
                     [](const Parameter& p) { return p.value.all_finite(); });
}

namespace {

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
};

std::vector<LayerShape> gnn_shapes(const ModelConfig& cfg, const ModelDims& dims) {
  std::vector<LayerShape> shapes;
  std::size_t in = dims.features;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::size_t out = l + 1 == cfg.layers ? dims.classes : cfg.hidden_dim;
    shapes.push_back({in, out});
    in = out;
  }
  return shapes;
}

std::string gnn_weight_name(std::size_t l) { return "gnn.W" + std::to_string(l); }
std::string gnn_attention_name(std::size_t l) { return "gnn.att" + std::to_string(l); }
std::string ba_weight_name(std::size_t k) { return "ba.W" + std::to_string(k); }

Matrix glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
              Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

bool bilinear_active(const ModelConfig& cfg) {
  return has_bilinear_path(cfg.variant) && cfg.alpha > 0.0;
}

bool gnn_active(const ModelConfig& cfg) {
  return !has_bilinear_path(cfg.variant) || cfg.alpha < 1.0;
}

}  // namespace

ModelState init_params(const ModelConfig& cfg, const ModelDims& dims, Rng& rng) {
  validate(cfg);
  if (dims.features == 0 || dims.classes == 0) throw ConfigError("empty feature or class dimension");
  ModelState state;
  const auto shapes = gnn_shapes(cfg, dims);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto [in, out] = shapes[l];
    state.params.push_back({gnn_weight_name(l), glorot(in, out, in, out, rng), true});
    if (uses_attention(cfg.variant)) {
      state.params.push_back({gnn_attention_name(l), glorot(1, 2 * out, 2 * out, 1, rng), false});
    }
  }
  if (has_bilinear_path(cfg.variant) && !cfg.share_weights) {
    for (std::size_t k = 1; k <= cfg.layers; ++k) {
      state.params.push_back({ba_weight_name(k),
                              glorot(dims.features, dims.classes, dims.features, dims.classes, rng),
                              true});
    }
  }
  return state;
}

ModelState init_params(const ModelConfig& cfg, const ModelDims& dims) {
  Rng rng = make_rng(cfg.seed, Stream::Init);
  return init_params(cfg, dims, rng);
}

std::size_t parameter_count(const ModelConfig& cfg, const ModelDims& dims) {
  std::size_t n = 0;
  for (const auto& [in, out] : gnn_shapes(cfg, dims)) {
    n += in * out;
    if (uses_attention(cfg.variant)) n += 2 * out;
  }
  if (has_bilinear_path(cfg.variant) && !cfg.share_weights) {
    n += cfg.layers * dims.features * dims.classes;
  }
  return n;
}

GraphOperators build_graph_operators(const SparseAdjacency& adjacency, std::size_t hops,
                                     HopMode mode) {
  if (hops == 0) throw ConfigError("build_graph_operators: hops must be at least 1");
  GraphOperators g;
  g.adjacency = adjacency;
  g.with_loops = add_self_loops(adjacency);
  g.gcn_norm = gcn_normalize(g.with_loops);
  g.hop_with_loops.push_back(g.with_loops);
  for (std::size_t k = 2; k <= hops; ++k) {
    g.hop_with_loops.push_back(add_self_loops(khop_binarize(adjacency, k, mode)));
  }
  return g;
}

namespace {

const Parameter& require(const ModelState& state, const std::string& name, std::size_t rows,
                         std::size_t cols) {
  const Parameter* p = state.find(name);
  if (!p) throw ConfigError("model state lacks parameter '" + name + "'");
  if (p->value.rows() != rows || p->value.cols() != cols) {
    throw ShapeError("parameter '" + name + "' has shape " + p->value.shape_string() +
                     ", expected (" + std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  return *p;
}

std::size_t index_of(const ModelState& state, const Parameter& p) {
  return static_cast<std::size_t>(&p - state.params.data());
}

}  // namespace

ForwardResult forward(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                      const GraphOperators& graph, const Matrix& features,
                      const ForwardOptions& options) {
  validate(cfg);
  const std::size_t n = features.rows();
  if (graph.adjacency.num_nodes() != n) {
    throw ShapeError("features have " + std::to_string(n) + " rows for a graph of " +
                     std::to_string(graph.adjacency.num_nodes()) + " nodes");
  }
  const bool bilinear = bilinear_active(cfg);
  if (bilinear && graph.hop_with_loops.size() < cfg.layers) {
    throw ConfigError("graph operators prepared for " + std::to_string(graph.hop_with_loops.size()) +
                      " hops, model needs " + std::to_string(cfg.layers));
  }
  const bool dropping = options.training && cfg.dropout > 0.0;
  if (dropping && options.dropout_rng == nullptr) {
    throw ConfigError("training forward with dropout needs a dropout rng");
  }
  Rng unused_rng;
  Rng& rng = options.dropout_rng ? *options.dropout_rng : unused_rng;

  // Bind every parameter as a gradient leaf, in state order.
  ForwardResult result;
  result.params.reserve(state.params.size());
  if (options.bound_params.empty()) {
    for (const auto& p : state.params) result.params.push_back(tape.leaf(p.value, true));
  } else {
    if (options.bound_params.size() != state.params.size()) {
      throw ShapeError("forward: " + std::to_string(options.bound_params.size()) +
                       " bound parameters for a state of " + std::to_string(state.params.size()));
    }
    for (std::size_t i = 0; i < state.params.size(); ++i) {
      if (!options.bound_params[i].value().same_shape(state.params[i].value)) {
        throw ShapeError("forward: bound parameter '" + state.params[i].name + "' has shape " +
                         options.bound_params[i].value().shape_string());
      }
      result.params.push_back(options.bound_params[i]);
    }
  }
  auto bound = [&](const Parameter& p) { return result.params[index_of(state, p)]; };

  const Var x = tape.constant_view(features);
  const std::size_t classes = [&] {
    const Parameter* last = state.find(gnn_weight_name(cfg.layers - 1));
    if (!last) throw ConfigError("model state lacks parameter '" + gnn_weight_name(cfg.layers - 1) + "'");
    return last->value.cols();
  }();
  ModelDims dims{features.cols(), classes};
  const auto shapes = gnn_shapes(cfg, dims);

  std::optional<Var> gnn_out;
  if (gnn_active(cfg)) {
    Var h = x;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      const auto [in, out] = shapes[l];
      const Var w = bound(require(state, gnn_weight_name(l), in, out));
      h = dropout(h, cfg.dropout, rng, options.training);
      if (uses_attention(cfg.variant)) {
        const Var att = bound(require(state, gnn_attention_name(l), 1, 2 * out));
        h = linear_agg_gat(h, graph.with_loops, w, AttentionParams{att, cfg.attention_slope});
      } else {
        h = linear_agg_gcn(h, graph.gcn_norm, w);
      }
      if (l + 1 < cfg.layers) h = uses_attention(cfg.variant) ? elu(h) : relu(h);
    }
    gnn_out = h;
  }

  std::optional<Var> ba_out;
  if (bilinear) {
    const BilinearScope scope = bilinear_scope(cfg.variant);
    for (std::size_t k = 1; k <= cfg.layers; ++k) {
      const double beta = cfg.beta[k - 1];
      if (beta == 0.0) continue;
      const Var w = cfg.share_weights
                        ? bound(require(state, gnn_weight_name(0), dims.features, classes))
                        : bound(require(state, ba_weight_name(k), dims.features, classes));
      const Var xk = dropout(x, cfg.dropout, rng, options.training);
      const Var term = bilinear_fast(xk, graph.hop(k), w, scope);
      ba_out = ba_out ? add_scaled(*ba_out, term, 1.0, beta) : (beta == 1.0 ? term : scale(term, beta));
    }
  }

  if (!ba_out) {
    result.logits = *gnn_out;
  } else if (!gnn_out) {
    result.logits = *ba_out;
  } else {
    result.logits = add_scaled(*gnn_out, *ba_out, 1.0 - cfg.alpha, cfg.alpha);
  }
  return result;
}

namespace {

void require_depth(const ModelConfig& cfg, std::size_t layers, const char* fn) {
  if (cfg.layers != layers) {
    throw ConfigError(std::string(fn) + " called with a " + std::to_string(cfg.layers) +
                      "-layer config");
  }
}

}  // namespace

ForwardResult forward_1layer(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                             const GraphOperators& graph, const Matrix& features,
                             const ForwardOptions& options) {
  require_depth(cfg, 1, "forward_1layer");
  return forward(tape, cfg, state, graph, features, options);
}

ForwardResult forward_2layer(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                             const GraphOperators& graph, const Matrix& features,
                             const ForwardOptions& options) {
  require_depth(cfg, 2, "forward_2layer");
  return forward(tape, cfg, state, graph, features, options);
}

ForwardResult forward_klayer(Tape& tape, const ModelConfig& cfg, const ModelState& state,
                             const GraphOperators& graph, const Matrix& features,
                             const ForwardOptions& options) {
  return forward(tape, cfg, state, graph, features, options);
}

Matrix predict_logits(const ModelConfig& cfg, const ModelState& state,
                      const GraphOperators& graph, const Matrix& features) {
  Tape tape;
  return forward(tape, cfg, state, graph, features).logits.value();
}

Var l2_penalty(const ModelState& state, std::span<const Var> params, double lambda) {
  if (params.size() != state.params.size() || params.empty()) {
    throw ShapeError("l2_penalty: parameter list does not match model state");
  }
  std::optional<Var> total;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!state.params[i].decay) continue;
    const Var term = sum_squares(params[i]);
    total = total ? add_scaled(*total, term, 1.0, 1.0) : term;
  }
  if (!total) return params.front().tape().constant(Matrix(1, 1, 0.0));
  return scale(*total, lambda);
}

}  // namespace bgnn
