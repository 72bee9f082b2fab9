#pragma once

#include <string>
#include <vector>

#include "glickformer/model.hpp"
#include "glickformer/nn.hpp"

// Finite-difference verification suites for every differentiable component
// and for the full model variants at a reduced configuration. Inputs are
// registered as parameters too, so input gradients are checked alongside
// weight gradients.
namespace glick::checks {

struct SuiteResult {
  std::string name;
  nn::GradCheckReport report;
};

namespace detail {

inline nn::Tensor random_weights(const std::vector<std::size_t>& shape,
                                 Rng& rng) {
  nn::Tensor t(shape);
  for (double& x : t.v) x = rng.next_uniform(-1.0, 1.0);
  return t;
}

inline nn::Parameter* random_input(nn::ParameterStore& store,
                                   const std::string& name,
                                   std::vector<std::size_t> shape, Rng& rng,
                                   double scale = 1.0) {
  nn::Parameter* p = store.create(name, std::move(shape), nn::Init::zeros, rng);
  for (double& x : p->value.v) x = scale * rng.next_normal();
  return p;
}

}  // namespace detail

inline SuiteResult check_linear(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("linear");
  nn::Parameter* x = detail::random_input(store, "x", {3, 4}, rng);
  nn::LinearParams lin = nn::make_linear(store, "lin", 4, 5, true, rng);
  nn::Tensor w = detail::random_weights({3, 5}, rng);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* y = g.weighted_sum(nn::linear(g, g.leaf(x), lin), w);
    if (sink) g.backward(y, 1.0, *sink);
    return y->val().v[0];
  };
  return {"linear", nn::grad_check(f, store, {.tolerance = 1e-4})};
}

inline SuiteResult check_layer_norm(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("layer_norm");
  nn::Parameter* x = detail::random_input(store, "x", {4, 6}, rng, 2.0);
  nn::LayerNormParams ln = nn::make_layer_norm(store, "ln", 6, rng);
  // Non-trivial gain/bias so their gradients are exercised.
  for (double& v : ln.gain->value.v) v = 1.0 + 0.3 * rng.next_normal();
  for (double& v : ln.bias->value.v) v = 0.2 * rng.next_normal();
  nn::Tensor w = detail::random_weights({4, 6}, rng);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* y = g.weighted_sum(nn::layer_norm(g, g.leaf(x), ln), w);
    if (sink) g.backward(y, 1.0, *sink);
    return y->val().v[0];
  };
  return {"layer_norm", nn::grad_check(f, store, {.tolerance = 1e-4})};
}

inline SuiteResult check_mish(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("mish");
  nn::Parameter* x = detail::random_input(store, "x", {3, 7}, rng, 3.0);
  nn::Tensor w = detail::random_weights({3, 7}, rng);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* y = g.weighted_sum(g.mish(g.leaf(x)), w);
    if (sink) g.backward(y, 1.0, *sink);
    return y->val().v[0];
  };
  return {"mish", nn::grad_check(f, store, {.tolerance = 1e-4})};
}

inline SuiteResult check_softmax(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("softmax");
  nn::Parameter* x = detail::random_input(store, "x", {4, 5}, rng, 2.0);
  nn::Tensor w = detail::random_weights({4, 5}, rng);
  std::vector<std::uint8_t> keep = {1, 0, 1, 1, 0};
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* full = g.softmax_rows(g.leaf(x));
    nn::Node* masked = g.softmax_rows(g.leaf(x), keep);
    nn::Node* y = g.weighted_sum(g.add(full, masked), w);
    if (sink) g.backward(y, 1.0, *sink);
    return y->val().v[0];
  };
  return {"softmax", nn::grad_check(f, store, {.tolerance = 1e-4})};
}

inline SuiteResult check_attention(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("attention");
  nn::Parameter* x = detail::random_input(store, "x", {5, 8}, rng);
  nn::AttentionParams attn = nn::make_attention(store, "attn", 8, 2, 4, 8, rng);
  nn::Parameter* b0 = detail::random_input(store, "bias0", {5, 5}, rng, 0.5);
  nn::Parameter* b1 = detail::random_input(store, "bias1", {5, 5}, rng, 0.5);
  nn::Tensor w = detail::random_weights({5, 8}, rng);
  std::vector<std::uint8_t> keep = {1, 1, 0, 1, 1};
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    std::vector<nn::Node*> bias = {g.leaf(b0), g.leaf(b1)};
    nn::Node* y = nn::multi_head_attention(g, g.leaf(x), g.leaf(x), g.leaf(x),
                                           attn, bias, &keep);
    nn::Node* obj = g.weighted_sum(y, w);
    if (sink) g.backward(obj, 1.0, *sink);
    return obj->val().v[0];
  };
  return {"attention", nn::grad_check(f, store, {.tolerance = 1e-4})};
}

inline SuiteResult check_grouped_attention(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("grouped");
  nn::Parameter* x = detail::random_input(store, "x", {6, 8}, rng);
  nn::AttentionParams attn = nn::make_attention(store, "attn", 8, 2, 2, 8, rng);
  nn::Tensor w = detail::random_weights({6, 8}, rng);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* y = nn::grouped_self_attention(g, g.leaf(x), attn, 3);
    nn::Node* obj = g.weighted_sum(y, w);
    if (sink) g.backward(obj, 1.0, *sink);
    return obj->val().v[0];
  };
  return {"temporal_grouped_attention",
          nn::grad_check(f, store, {.tolerance = 1e-4})};
}

inline model::ModelConfig reduced_config(model::Variant v) {
  model::ModelConfig cfg;
  cfg.d = 32;
  cfg.heads = 2;
  cfg.spatial_layers = 2;
  cfg.temporal_layers = 2;
  cfg.n_max = 3;
  cfg.d_z = 4;
  cfg.variant = v;
  return cfg;
}

inline SuiteResult check_smolgen(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("smolgen");
  model::ModelConfig cfg = reduced_config(model::Variant::factorized_encoder);
  nn::Parameter* x = detail::random_input(store, "x", {64, cfg.d}, rng);
  nn::Parameter* wb = store.create("wb", {cfg.h_s(), 64 * 64},
                                   nn::Init::glorot_uniform, rng);
  model::SmolgenParams sg = model::make_smolgen(store, "smolgen", cfg, wb, rng);
  nn::Tensor w = detail::random_weights({64 * cfg.heads, 64}, rng);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    auto biases = model::smolgen_bias(g, g.leaf(x), sg, cfg);
    nn::Node* obj = g.weighted_sum(g.concat_rows(biases), w);
    if (sink) g.backward(obj, 1.0, *sink);
    return obj->val().v[0];
  };
  return {"smolgen",
          nn::grad_check(f, store,
                         {.tolerance = 1e-4, .samples_per_param = 24,
                          .seed = seed})};
}

inline SuiteResult check_spatial_block(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("spatial");
  model::ModelConfig cfg = reduced_config(model::Variant::factorized_encoder);
  nn::Parameter* x = detail::random_input(store, "x", {64, cfg.d}, rng);
  nn::Parameter* wb = store.create("wb", {cfg.h_s(), 64 * 64},
                                   nn::Init::glorot_uniform, rng);
  model::SpatialBlock blk =
      model::make_spatial_block(store, "block", cfg, wb, rng);
  nn::Tensor w = detail::random_weights({64, cfg.d}, rng);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* y = model::spatial_block(g, g.leaf(x), blk, cfg);
    nn::Node* obj = g.weighted_sum(y, w);
    if (sink) g.backward(obj, 1.0, *sink);
    return obj->val().v[0];
  };
  return {"spatial_block",
          nn::grad_check(f, store,
                         {.tolerance = 1e-4, .samples_per_param = 24,
                          .seed = seed})};
}

inline SuiteResult check_temporal_layer(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("temporal");
  const std::size_t d_e = 64;
  nn::Parameter* x = detail::random_input(store, "x", {3, d_e}, rng);
  nn::AttentionParams attn =
      nn::make_attention(store, "attn", d_e, 2, d_e / 2, d_e, rng);
  nn::LayerNormParams ln1 = nn::make_layer_norm(store, "ln1", d_e, rng);
  nn::FfnParams ffn = nn::make_ffn(store, "ffn", d_e, 4, rng);
  nn::LayerNormParams ln2 = nn::make_layer_norm(store, "ln2", d_e, rng);
  nn::Tensor w = detail::random_weights({3, d_e}, rng);
  std::vector<std::uint8_t> mask = {1, 1, 0};
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* seq = g.leaf(x);
    nn::Node* a = nn::multi_head_attention(g, seq, seq, seq, attn, {}, &mask);
    seq = nn::layer_norm(g, g.add(seq, a), ln1);
    nn::Node* fout = nn::feed_forward(g, seq, ffn);
    seq = nn::layer_norm(g, g.add(seq, fout), ln2);
    nn::Node* obj = g.weighted_sum(seq, w);
    if (sink) g.backward(obj, 1.0, *sink);
    return obj->val().v[0];
  };
  return {"temporal_layer",
          nn::grad_check(f, store,
                         {.tolerance = 1e-4, .samples_per_param = 24,
                          .seed = seed})};
}

inline SuiteResult check_head(std::uint64_t seed) {
  nn::ParameterStore store;
  Rng rng = Rng(seed).stream("head");
  model::ModelConfig cfg = reduced_config(model::Variant::factorized_encoder);
  nn::Parameter* x = detail::random_input(store, "x", {64, cfg.d}, rng);
  model::TokenTransformParams tok;
  tok.w1 = nn::make_linear(store, "token.w1", cfg.d, cfg.d_z, true, rng);
  tok.w2 = nn::make_linear(store, "token.w2", 64 * cfg.d_z, cfg.d_e(), true, rng);
  model::HeadParams head;
  head.fc1 = nn::make_linear(store, "head.fc1", cfg.d_e(), cfg.d_e(), true, rng);
  head.fc2 = nn::make_linear(store, "head.fc2", cfg.d_e(), 1, true, rng);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* s = model::token_transform(g, g.leaf(x), tok, cfg);
    nn::Node* y = model::prediction_head(g, s, head);
    if (sink) g.backward(y, 1.0, *sink);
    return y->val().v[0];
  };
  return {"token_transform_head",
          nn::grad_check(f, store,
                         {.tolerance = 1e-4, .samples_per_param = 24,
                          .seed = seed})};
}

/// A fixed six-move puzzle (three solver boards) for end-to-end checks.
inline encoding::PuzzleEncoding fixed_encoding(std::size_t n_max) {
  puzzles::PuzzleRecord rec;
  rec.id = "gradcheck";
  rec.fen = chess::serialize_fen(chess::start_position());
  for (const char* u : {"e2e4", "e7e5", "g1f3", "b8c6", "f1c4", "g8f6"}) {
    rec.moves.push_back(chess::parse_uci(u));
  }
  rec.rating = 1700;
  rec.rating_deviation = 80;
  return encoding::encode_puzzle(rec, n_max, {});
}

inline SuiteResult check_variant(model::Variant v, std::uint64_t seed,
                                 std::size_t samples_per_param = 6) {
  model::GlickFormer m(reduced_config(v), seed);
  encoding::PuzzleEncoding enc = fixed_encoding(m.config().n_max);
  nn::DifferentiableFn f = [&](nn::GradVec* sink) {
    nn::Graph g;
    nn::Node* y = m.build(g, enc);
    const double v0 = y->val().v[0];
    if (sink) g.backward(y, 2.0 * v0, *sink);
    return v0 * v0;
  };
  return {"model_" + model::variant_tag(v),
          nn::grad_check(f, m.params(),
                         {.tolerance = 1e-3, .samples_per_param = samples_per_param,
                          .seed = seed})};
}

inline std::vector<SuiteResult> run_layer_checks(std::uint64_t seed) {
  return {check_linear(seed),   check_layer_norm(seed),
          check_mish(seed),     check_softmax(seed),
          check_attention(seed), check_grouped_attention(seed),
          check_smolgen(seed),  check_spatial_block(seed),
          check_temporal_layer(seed), check_head(seed)};
}

inline std::vector<SuiteResult> run_model_checks(std::uint64_t seed) {
  return {check_variant(model::Variant::factorized_encoder, seed),
          check_variant(model::Variant::factorized_self_attention, seed),
          check_variant(model::Variant::baseline_stacked, seed)};
}

/// CLI surface: all|smolgen|spatial|temporal|head.
inline std::vector<SuiteResult> run_module(const std::string& module,
                                           std::uint64_t seed) {
  if (module == "smolgen") return {check_smolgen(seed)};
  if (module == "spatial") return {check_spatial_block(seed)};
  if (module == "temporal") {
    return {check_temporal_layer(seed), check_grouped_attention(seed)};
  }
  if (module == "head") return {check_head(seed)};
  if (module == "all") {
    auto all = run_layer_checks(seed);
    for (auto& r : run_model_checks(seed)) all.push_back(std::move(r));
    return all;
  }
  throw DataError("gradcheck: unknown module '" + module +
                  "' (expected all|smolgen|spatial|temporal|head)");
}

}  // namespace glick::checks
