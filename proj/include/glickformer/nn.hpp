#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "glickformer/graph.hpp"
#include "glickformer/params.hpp"
#include "glickformer/rng.hpp"

namespace glick::nn {

// ---------------------------------------------------------------------------
// Layer parameter bundles
// ---------------------------------------------------------------------------

struct LinearParams {
  Parameter* w = nullptr;
  Parameter* b = nullptr;  // optional
};

inline LinearParams make_linear(ParameterStore& store, const std::string& name,
                                std::size_t in, std::size_t out, bool bias,
                                Rng& rng) {
  LinearParams p;
  p.w = store.create(name + ".w", {in, out}, Init::glorot_uniform, rng);
  if (bias) p.b = store.create(name + ".b", {out}, Init::zeros, rng);
  return p;
}

inline Node* linear(Graph& g, Node* x, const LinearParams& p) {
  Node* y = g.matmul(x, g.leaf(p.w));
  if (p.b) y = g.add_rowvec(y, g.leaf(p.b));
  return y;
}

struct LayerNormParams {
  Parameter* gain = nullptr;
  Parameter* bias = nullptr;
};

inline LayerNormParams make_layer_norm(ParameterStore& store,
                                       const std::string& name, std::size_t k,
                                       Rng& rng) {
  LayerNormParams p;
  p.gain = store.create(name + ".gain", {k}, Init::ones, rng);
  p.bias = store.create(name + ".bias", {k}, Init::zeros, rng);
  return p;
}

inline Node* layer_norm(Graph& g, Node* x, const LayerNormParams& p,
                        double eps = 1e-5) {
  return g.layer_norm(x, g.leaf(p.gain), g.leaf(p.bias), eps);
}

struct FfnParams {
  LinearParams up, down;
};

inline FfnParams make_ffn(ParameterStore& store, const std::string& name,
                          std::size_t d, std::size_t mult, Rng& rng) {
  FfnParams p;
  p.up = make_linear(store, name + ".up", d, mult * d, false, rng);
  p.down = make_linear(store, name + ".down", mult * d, d, false, rng);
  return p;
}

inline Node* feed_forward(Graph& g, Node* x, const FfnParams& p) {
  return linear(g, g.mish(linear(g, x, p.up)), p.down);
}

// ---------------------------------------------------------------------------
// Multi-head attention
// ---------------------------------------------------------------------------

struct AttentionParams {
  std::size_t heads = 0;
  std::size_t head_dim = 0;
  std::vector<Parameter*> wq, wk, wv;  // heads x [d_in, head_dim]
  Parameter* wo = nullptr;             // [heads*head_dim, d_out]
};

inline AttentionParams make_attention(ParameterStore& store,
                                      const std::string& name, std::size_t d_in,
                                      std::size_t heads, std::size_t head_dim,
                                      std::size_t d_out, Rng& rng) {
  AttentionParams p;
  p.heads = heads;
  p.head_dim = head_dim;
  for (std::size_t j = 0; j < heads; ++j) {
    std::string h = name + "." + std::to_string(j);
    p.wq.push_back(store.create(h + ".wq", {d_in, head_dim},
                                Init::glorot_uniform, rng));
    p.wk.push_back(store.create(h + ".wk", {d_in, head_dim},
                                Init::glorot_uniform, rng));
    p.wv.push_back(store.create(h + ".wv", {d_in, head_dim},
                                Init::glorot_uniform, rng));
  }
  p.wo = store.create(name + ".wo", {heads * head_dim, d_out},
                      Init::glorot_uniform, rng);
  return p;
}

/// Scaled dot-product attention over h heads. `head_bias` is either empty or
/// one [n,n] additive bias per head, applied before the softmax. `key_mask`
/// (optional, length n) drops masked keys; a fully masked row yields zeros.
///
/// The per-head projection weights are concatenated into one matmul per
/// input and sliced back per head; same arithmetic, larger kernels.
inline Node* multi_head_attention(Graph& g, Node* q_in, Node* k_in, Node* v_in,
                                  const AttentionParams& p,
                                  std::span<Node* const> head_bias = {},
                                  const std::vector<std::uint8_t>* key_mask =
                                      nullptr) {
  const std::size_t n = q_in->val().rows();
  const std::size_t hd = p.head_dim;
  if (!head_bias.empty() && head_bias.size() != p.heads) {
    throw ShapeError("attention: expected one bias per head");
  }
  auto project = [&](Node* x, const std::vector<Parameter*>& w) {
    if (p.heads == 1) return g.matmul(x, g.leaf(w[0]));
    std::vector<Node*> leaves;
    leaves.reserve(p.heads);
    for (Parameter* wj : w) leaves.push_back(g.leaf(wj));
    return g.matmul(x, g.concat_cols(leaves));
  };
  Node* q_all = project(q_in, p.wq);
  Node* k_all = project(k_in, p.wk);
  Node* v_all = project(v_in, p.wv);

  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<Node*> outputs;
  outputs.reserve(p.heads);
  for (std::size_t j = 0; j < p.heads; ++j) {
    Node* q = p.heads == 1 ? q_all : g.slice_cols(q_all, j * hd, (j + 1) * hd);
    Node* k = p.heads == 1 ? k_all : g.slice_cols(k_all, j * hd, (j + 1) * hd);
    Node* v = p.heads == 1 ? v_all : g.slice_cols(v_all, j * hd, (j + 1) * hd);
    Node* scores = g.scale(g.matmul_t(q, k), inv_sqrt_dk);
    if (!head_bias.empty()) {
      if (head_bias[j]->val().rows() != n || head_bias[j]->val().cols() != n) {
        throw ShapeError("attention: bias must be [n,n], got " +
                         Tensor::shape_str(head_bias[j]->val().shape));
      }
      scores = g.add(scores, head_bias[j]);
    }
    Node* weights = g.softmax_rows(
        scores, key_mask ? *key_mask : std::vector<std::uint8_t>{});
    outputs.push_back(g.matmul(weights, v));
  }
  Node* merged = p.heads == 1 ? outputs[0] : g.concat_cols(outputs);
  return g.matmul(merged, g.leaf(p.wo));
}

/// Self-attention over consecutive groups of `block` rows of x, sharing one
/// projection set. Equivalent to running multi_head_attention on each group
/// separately; `head_bias` entries, when given, are the per-group biases
/// stacked vertically ([rows, block] per head).
inline Node* grouped_self_attention(Graph& g, Node* x,
                                    const AttentionParams& p,
                                    std::size_t block,
                                    std::span<Node* const> head_bias = {}) {
  const std::size_t hd = p.head_dim;
  if (!head_bias.empty() && head_bias.size() != p.heads) {
    throw ShapeError("attention: expected one bias per head");
  }
  auto project = [&](const std::vector<Parameter*>& w) {
    if (p.heads == 1) return g.matmul(x, g.leaf(w[0]));
    std::vector<Node*> leaves;
    leaves.reserve(p.heads);
    for (Parameter* wj : w) leaves.push_back(g.leaf(wj));
    return g.matmul(x, g.concat_cols(leaves));
  };
  Node* q_all = project(p.wq);
  Node* k_all = project(p.wk);
  Node* v_all = project(p.wv);

  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<Node*> outputs;
  outputs.reserve(p.heads);
  for (std::size_t j = 0; j < p.heads; ++j) {
    Node* q = p.heads == 1 ? q_all : g.slice_cols(q_all, j * hd, (j + 1) * hd);
    Node* k = p.heads == 1 ? k_all : g.slice_cols(k_all, j * hd, (j + 1) * hd);
    Node* v = p.heads == 1 ? v_all : g.slice_cols(v_all, j * hd, (j + 1) * hd);
    Node* scores = g.scale(g.block_matmul_t(q, k, block), inv_sqrt_dk);
    if (!head_bias.empty()) scores = g.add(scores, head_bias[j]);
    Node* weights = g.softmax_rows(scores);
    outputs.push_back(g.block_matmul(weights, v, block));
  }
  Node* merged = p.heads == 1 ? outputs[0] : g.concat_cols(outputs);
  return g.matmul(merged, g.leaf(p.wo));
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checking
// ---------------------------------------------------------------------------

/// Scalar computation over the parameters of a store. When the sink pointer
/// is non-null the callee must also backpropagate into it.
using DifferentiableFn = std::function<double(GradVec*)>;

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  // |analytic - numeric| below this passes outright; absorbs the f64
  // cancellation floor of central differences on O(1) objectives.
  double abs_floor = 1e-9;
  // 0 checks every entry; otherwise this many entries per parameter,
  // drawn deterministically from `seed`.
  std::size_t samples_per_param = 0;
  std::uint64_t seed = 7;
};

struct ParamCheck {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t entries_checked = 0;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_err = 0.0;
  bool finite = true;
  double tolerance = 0.0;

  bool passed() const { return finite && max_rel_err <= tolerance; }
};

/// Central finite differences vs analytic gradients, per parameter.
inline GradCheckReport grad_check(const DifferentiableFn& f,
                                  ParameterStore& store,
                                  const GradCheckOptions& opt = {}) {
  GradCheckReport report;
  report.tolerance = opt.tolerance;

  GradVec sink = make_grad_vec(store);
  double base = f(&sink);
  if (!std::isfinite(base)) {
    report.finite = false;
    return report;
  }

  for (std::size_t pi = 0; pi < store.size(); ++pi) {
    Parameter& p = store.at(pi);
    const std::size_t total = p.value.size();

    std::vector<std::size_t> entries;
    if (opt.samples_per_param == 0 || total <= opt.samples_per_param) {
      entries.resize(total);
      for (std::size_t e = 0; e < total; ++e) entries[e] = e;
    } else {
      Rng rng = Rng(opt.seed).stream(p.name);
      std::set<std::size_t> picked;
      picked.insert(0);
      picked.insert(total - 1);
      while (picked.size() < opt.samples_per_param) {
        picked.insert(static_cast<std::size_t>(rng.next_below(total)));
      }
      entries.assign(picked.begin(), picked.end());
    }

    ParamCheck pc;
    pc.name = p.name;
    pc.entries_checked = entries.size();
    for (std::size_t e : entries) {
      const double saved = p.value.v[e];
      p.value.v[e] = saved + opt.step;
      double fp = f(nullptr);
      p.value.v[e] = saved - opt.step;
      double fm = f(nullptr);
      p.value.v[e] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        report.finite = false;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * opt.step);
      const double analytic = sink[pi].empty() ? 0.0 : sink[pi].v[e];
      const double diff = std::abs(analytic - numeric);
      double rel = 0.0;
      if (diff > opt.abs_floor) {
        rel = diff / std::max(std::abs(analytic), std::abs(numeric));
      }
      pc.max_rel_err = std::max(pc.max_rel_err, rel);
    }
    report.max_rel_err = std::max(report.max_rel_err, pc.max_rel_err);
    report.params.push_back(std::move(pc));
  }
  return report;
}

}  // namespace glick::nn
