#include "bgnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bgnn/error.hpp"

namespace bgnn {

namespace {

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
  }
}

Matrix scalar(double v) { return Matrix(1, 1, v); }

// Element-wise map with a derivative evaluated on the input.
template <typename F, typename DF>
Var unary(Var a, F f, DF df) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  auto xs = x.data();
  auto os = out.data();
  for (std::size_t k = 0; k < xs.size(); ++k) os[k] = f(xs[k]);
  return a.tape().record(std::move(out), {a}, [a, df](Tape& t, const Matrix& g) {
    t.accumulate_with(a, [&](Matrix& ga) {
      auto xs = a.value().data();
      auto gs = g.data();
      auto dst = ga.data();
      for (std::size_t k = 0; k < xs.size(); ++k) dst[k] += gs[k] * df(xs[k]);
    });
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Matrix out = bgnn::matmul(a.value(), b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, matmul_nt(g, b.value()));
    if (b.requires_grad()) t.accumulate(b, matmul_tn(a.value(), g));
  });
}

Var spmm(const SparseAdjacency& adj, Var dense) {
  const Matrix& x = dense.value();
  if (adj.num_nodes() != x.rows()) {
    throw ShapeError("spmm: adjacency on " + std::to_string(adj.num_nodes()) + " nodes vs " +
                     x.shape_string());
  }
  Matrix out(x.rows(), x.cols());
  const auto row_ptr = adj.row_ptr();
  const auto cols = adj.col_idx();
  for (std::size_t v = 0; v < adj.num_nodes(); ++v) {
    auto dst = out.row(v);
    for (std::size_t k = row_ptr[v]; k < row_ptr[v + 1]; ++k) {
      const double w = adj.value(k);
      auto src = x.row(cols[k]);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
  }
  const SparseAdjacency* a = &adj;
  return dense.tape().record(std::move(out), {dense}, [a, dense](Tape& t, const Matrix& g) {
    t.accumulate_with(dense, [&](Matrix& gd) {
      const auto row_ptr = a->row_ptr();
      const auto cols = a->col_idx();
      for (std::size_t v = 0; v < a->num_nodes(); ++v) {
        auto src = g.row(v);
        for (std::size_t k = row_ptr[v]; k < row_ptr[v + 1]; ++k) {
          const double w = a->value(k);
          auto dst = gd.row(cols[k]);
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
        }
      }
    });
  });
}

Var pair_interactions(Var s, const SparseAdjacency& adj, std::span<const double> c) {
  const Matrix& x = s.value();
  if (adj.num_nodes() != x.rows() || c.size() != x.rows()) {
    throw ShapeError("pair_interactions: adjacency on " + std::to_string(adj.num_nodes()) +
                     " nodes, " + std::to_string(c.size()) + " scales vs " + x.shape_string());
  }
  const std::size_t d = x.cols();
  Matrix sums(x.rows(), d);
  Matrix out(x.rows(), d);
  std::vector<double> sq(d);
  const auto row_ptr = adj.row_ptr();
  const auto cols = adj.col_idx();
  for (std::size_t v = 0; v < adj.num_nodes(); ++v) {
    auto t = sums.row(v);
    std::fill(sq.begin(), sq.end(), 0.0);
    for (std::size_t k = row_ptr[v]; k < row_ptr[v + 1]; ++k) {
      const double w = adj.value(k);
      auto src = x.row(cols[k]);
      for (std::size_t j = 0; j < d; ++j) {
        t[j] += w * src[j];
        sq[j] += w * src[j] * src[j];
      }
    }
    auto o = out.row(v);
    const double half = 0.5 * c[v];
    for (std::size_t j = 0; j < d; ++j) o[j] = half * (t[j] * t[j] - sq[j]);
  }
  const SparseAdjacency* a = &adj;
  std::vector<double> scales(c.begin(), c.end());
  return s.tape().record(
      std::move(out), {s},
      [a, s, sums = std::move(sums), scales = std::move(scales)](Tape& tape, const Matrix& g) {
        tape.accumulate_with(s, [&](Matrix& gs) {
          const Matrix& x = s.value();
          const std::size_t d = x.cols();
          // d/ds_i = sum_v a_vi c_v g_v (t_v - s_i)
          Matrix back(x.rows(), d);
          const auto row_ptr = a->row_ptr();
          const auto cols = a->col_idx();
          std::vector<double> gt(d);
          for (std::size_t v = 0; v < a->num_nodes(); ++v) {
            if (scales[v] == 0.0) continue;
            auto gv = g.row(v);
            auto t = sums.row(v);
            for (std::size_t j = 0; j < d; ++j) gt[j] = scales[v] * gv[j] * t[j];
            for (std::size_t k = row_ptr[v]; k < row_ptr[v + 1]; ++k) {
              const double w = a->value(k);
              auto acc = gs.row(cols[k]);
              auto neg = back.row(cols[k]);
              for (std::size_t j = 0; j < d; ++j) {
                acc[j] += w * gt[j];
                neg[j] += w * scales[v] * gv[j];
              }
            }
          }
          auto gd = gs.data();
          auto bd = back.data();
          auto xd = x.data();
          for (std::size_t k = 0; k < gd.size(); ++k) gd[k] -= xd[k] * bd[k];
        });
      });
}

Var hadamard(Var a, Var b) {
  require_same_shape("hadamard", a.value(), b.value());
  Matrix out = a.value();
  auto os = out.data();
  auto bs = b.value().data();
  for (std::size_t k = 0; k < os.size(); ++k) os[k] *= bs[k];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    auto gs = g.data();
    t.accumulate_with(a, [&](Matrix& ga) {
      auto other = b.value().data();
      auto dst = ga.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += gs[k] * other[k];
    });
    t.accumulate_with(b, [&](Matrix& gb) {
      auto other = a.value().data();
      auto dst = gb.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += gs[k] * other[k];
    });
  });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var row_scale(Var a, std::span<const double> s) {
  const Matrix& x = a.value();
  if (s.size() != x.rows()) {
    throw ShapeError("row_scale: " + std::to_string(s.size()) + " scales for " + x.shape_string());
  }
  Matrix out = x;
  for (std::size_t v = 0; v < out.rows(); ++v)
    for (double& e : out.row(v)) e *= s[v];
  std::vector<double> scales(s.begin(), s.end());
  return a.tape().record(std::move(out), {a},
                         [a, scales = std::move(scales)](Tape& t, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             for (std::size_t v = 0; v < ga.rows(); ++v) {
                               auto dst = ga.row(v);
                               auto src = g.row(v);
                               for (std::size_t j = 0; j < dst.size(); ++j)
                                 dst[j] += scales[v] * src[j];
                             }
                           });
                         });
}

Var add_scaled(Var a, Var b, double wa, double wb) {
  require_same_shape("add_scaled", a.value(), b.value());
  Matrix out(a.rows(), a.cols());
  auto os = out.data();
  auto as = a.value().data();
  auto bs = b.value().data();
  for (std::size_t k = 0; k < os.size(); ++k) os[k] = wa * as[k] + wb * bs[k];
  return a.tape().record(std::move(out), {a, b}, [a, b, wa, wb](Tape& t, const Matrix& g) {
    auto gs = g.data();
    t.accumulate_with(a, [&](Matrix& ga) {
      auto dst = ga.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += wa * gs[k];
    });
    t.accumulate_with(b, [&](Matrix& gb) {
      auto dst = gb.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += wb * gs[k];
    });
  });
}

Var scale(Var a, double w) {
  return unary(a, [w](double x) { return w * x; }, [w](double) { return w; });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var elu(Var a, double alpha) {
  return unary(a, [alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); },
               [alpha](double x) { return x > 0.0 ? 1.0 : alpha * std::exp(x); });
}

Var leaky_relu(Var a, double slope) {
  return unary(a, [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double x) { return x > 0.0 ? 1.0 : slope; });
}

Var log_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  Matrix probs(x.rows(), x.cols());
  for (std::size_t v = 0; v < x.rows(); ++v) {
    auto src = x.row(v);
    auto dst = out.row(v);
    auto p = probs.row(v);
    const double m = *std::max_element(src.begin(), src.end());
    double z = 0.0;
    for (double e : src) z += std::exp(e - m);
    const double lse = m + std::log(z);
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = src[j] - lse;
      p[j] = std::exp(dst[j]);
    }
  }
  return a.tape().record(std::move(out), {a},
                         [a, probs = std::move(probs)](Tape& t, const Matrix& g) {
                           t.accumulate_with(a, [&](Matrix& ga) {
                             for (std::size_t v = 0; v < ga.rows(); ++v) {
                               auto gr = g.row(v);
                               auto p = probs.row(v);
                               auto dst = ga.row(v);
                               double total = 0.0;
                               for (double e : gr) total += e;
                               for (std::size_t j = 0; j < dst.size(); ++j)
                                 dst[j] += gr[j] - p[j] * total;
                             }
                           });
                         });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record(scalar(s), {a}, [a](Tape& t, const Matrix& g) {
    const double seed = g(0, 0);
    t.accumulate_with(a, [&](Matrix& ga) {
      for (double& e : ga.data()) e += seed;
    });
  });
}

Var sum_squares(Var a) {
  return a.tape().record(scalar(frobenius_sq(a.value())), {a}, [a](Tape& t, const Matrix& g) {
    const double seed = g(0, 0);
    t.accumulate_with(a, [&](Matrix& ga) {
      auto xs = a.value().data();
      auto dst = ga.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += 2.0 * seed * xs[k];
    });
  });
}

Var masked_cross_entropy(Var logits, std::span<const std::int32_t> labels,
                         std::span<const NodeId> mask) {
  if (mask.empty()) throw ConfigError("masked_cross_entropy: empty mask");
  const Matrix& x = logits.value();
  if (labels.size() != x.rows()) {
    throw ShapeError("masked_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     x.shape_string());
  }
  const auto classes = static_cast<std::int32_t>(x.cols());
  std::vector<NodeId> nodes(mask.begin(), mask.end());
  Matrix probs(nodes.size(), x.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const NodeId v = nodes[r];
    if (v >= x.rows()) throw ShapeError("masked_cross_entropy: mask node out of range");
    const std::int32_t y = labels[v];
    if (y < 0 || y >= classes) {
      throw ConfigError("masked_cross_entropy: label " + std::to_string(y) + " of node " +
                        std::to_string(v) + " outside [0," + std::to_string(classes) + ")");
    }
    auto src = x.row(v);
    const double m = *std::max_element(src.begin(), src.end());
    double z = 0.0;
    for (double e : src) z += std::exp(e - m);
    const double lse = m + std::log(z);
    loss += lse - src[static_cast<std::size_t>(y)];
    auto p = probs.row(r);
    for (std::size_t j = 0; j < src.size(); ++j) p[j] = std::exp(src[j] - lse);
  }
  const double inv = 1.0 / static_cast<double>(nodes.size());
  std::vector<std::int32_t> targets;
  targets.reserve(nodes.size());
  for (NodeId v : nodes) targets.push_back(labels[v]);
  return logits.tape().record(
      scalar(loss * inv), {logits},
      [logits, nodes = std::move(nodes), targets = std::move(targets), probs = std::move(probs),
       inv](Tape& t, const Matrix& g) {
        const double seed = g(0, 0) * inv;
        t.accumulate_with(logits, [&](Matrix& gl) {
          for (std::size_t r = 0; r < nodes.size(); ++r) {
            auto dst = gl.row(nodes[r]);
            auto p = probs.row(r);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += seed * p[j];
            dst[static_cast<std::size_t>(targets[r])] -= seed;
          }
        });
      });
}

Var dropout(Var a, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0,1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix mask(a.rows(), a.cols());
  Matrix out = a.value();
  auto ms = mask.data();
  auto os = out.data();
  for (std::size_t k = 0; k < os.size(); ++k) {
    if (os[k] == 0.0) continue;
    ms[k] = unit(rng) < rate ? 0.0 : keep_scale;
    os[k] *= ms[k];
  }
  return a.tape().record(std::move(out), {a}, [a, mask = std::move(mask)](Tape& t, const Matrix& g) {
    t.accumulate_with(a, [&](Matrix& ga) {
      auto gs = g.data();
      auto ms = mask.data();
      auto dst = ga.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += gs[k] * ms[k];
    });
  });
}

namespace {

struct AttentionForward {
  std::vector<double> coeff;  // per stored entry
  std::vector<double> score;  // pre-activation z per stored entry
};

AttentionForward attention_forward(const Matrix& s, const SparseAdjacency& adj, const Matrix& att,
                                   double slope) {
  const std::size_t d = s.cols();
  if (adj.num_nodes() != s.rows()) {
    throw ShapeError("attention: adjacency on " + std::to_string(adj.num_nodes()) +
                     " nodes vs " + s.shape_string());
  }
  if (att.rows() != 1 || att.cols() != 2 * d) {
    throw ShapeError("attention: vector " + att.shape_string() + " for feature width " +
                     std::to_string(d));
  }
  const std::size_t n = s.rows();
  std::vector<double> self_part(n), neigh_part(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto sv = s.row(v);
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      f1 += att(0, j) * sv[j];
      f2 += att(0, d + j) * sv[j];
    }
    self_part[v] = f1;
    neigh_part[v] = f2;
  }
  AttentionForward fw{std::vector<double>(adj.nnz()), std::vector<double>(adj.nnz())};
  const auto row_ptr = adj.row_ptr();
  const auto cols = adj.col_idx();
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t b = row_ptr[v], e = row_ptr[v + 1];
    if (b == e) continue;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = b; k < e; ++k) {
      const double z = self_part[v] + neigh_part[cols[k]];
      fw.score[k] = z;
      fw.coeff[k] = z > 0.0 ? z : slope * z;
      m = std::max(m, fw.coeff[k]);
    }
    double total = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      fw.coeff[k] = std::exp(fw.coeff[k] - m);
      total += fw.coeff[k];
    }
    for (std::size_t k = b; k < e; ++k) fw.coeff[k] /= total;
  }
  return fw;
}

}  // namespace

std::vector<double> attention_coefficients(const Matrix& s, const SparseAdjacency& adj_with_loops,
                                           const Matrix& att, double slope) {
  return attention_forward(s, adj_with_loops, att, slope).coeff;
}

Var attention_aggregate(Var s, const SparseAdjacency& adj_with_loops, Var att, double slope) {
  AttentionForward fw = attention_forward(s.value(), adj_with_loops, att.value(), slope);
  const Matrix& x = s.value();
  Matrix out(x.rows(), x.cols());
  const auto row_ptr = adj_with_loops.row_ptr();
  const auto cols = adj_with_loops.col_idx();
  for (std::size_t v = 0; v < x.rows(); ++v) {
    auto dst = out.row(v);
    for (std::size_t k = row_ptr[v]; k < row_ptr[v + 1]; ++k) {
      auto src = x.row(cols[k]);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += fw.coeff[k] * src[j];
    }
  }
  const SparseAdjacency* adj = &adj_with_loops;
  return s.tape().record(
      std::move(out), {s, att},
      [s, att, adj, slope, fw = std::move(fw)](Tape& t, const Matrix& g) {
        const Matrix& x = s.value();
        const Matrix& a = att.value();
        const std::size_t n = x.rows(), d = x.cols();
        const auto row_ptr = adj->row_ptr();
        const auto cols = adj->col_idx();
        Matrix ds(n, d);
        std::vector<double> d_self(n, 0.0), d_neigh(n, 0.0);
        std::vector<double> dcoeff;
        for (std::size_t v = 0; v < n; ++v) {
          const std::size_t b = row_ptr[v], e = row_ptr[v + 1];
          auto gv = g.row(v);
          dcoeff.assign(e - b, 0.0);
          double weighted = 0.0;
          for (std::size_t k = b; k < e; ++k) {
            auto si = x.row(cols[k]);
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += gv[j] * si[j];
            dcoeff[k - b] = dot;
            weighted += fw.coeff[k] * dot;
            auto dsi = ds.row(cols[k]);
            for (std::size_t j = 0; j < d; ++j) dsi[j] += fw.coeff[k] * gv[j];
          }
          for (std::size_t k = b; k < e; ++k) {
            const double de = fw.coeff[k] * (dcoeff[k - b] - weighted);
            const double dz = de * (fw.score[k] > 0.0 ? 1.0 : slope);
            d_self[v] += dz;
            d_neigh[cols[k]] += dz;
          }
        }
        if (s.requires_grad()) {
          for (std::size_t v = 0; v < n; ++v) {
            auto dst = ds.row(v);
            for (std::size_t j = 0; j < d; ++j) dst[j] += d_self[v] * a(0, j) + d_neigh[v] * a(0, d + j);
          }
          t.accumulate(s, ds);
        }
        t.accumulate_with(att, [&](Matrix& ga) {
          for (std::size_t v = 0; v < n; ++v) {
            auto sv = x.row(v);
            for (std::size_t j = 0; j < d; ++j) {
              ga(0, j) += d_self[v] * sv[j];
              ga(0, d + j) += d_neigh[v] * sv[j];
            }
          }
        });
      });
}

}  // namespace bgnn
