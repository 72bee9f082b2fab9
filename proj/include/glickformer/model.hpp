#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "glickformer/encoding.hpp"
#include "glickformer/nn.hpp"

namespace glick::model {

enum class Variant {
  factorized_encoder,
  factorized_self_attention,
  baseline_stacked,
};

inline std::string variant_tag(Variant v) {
  switch (v) {
    case Variant::factorized_encoder: return "fe";
    case Variant::factorized_self_attention: return "fsa";
    case Variant::baseline_stacked: return "baseline";
  }
  return "?";
}

inline Variant variant_from_tag(const std::string& tag) {
  if (tag == "fe") return Variant::factorized_encoder;
  if (tag == "fsa") return Variant::factorized_self_attention;
  if (tag == "baseline") return Variant::baseline_stacked;
  throw DataError("unknown variant '" + tag + "' (expected fe|fsa|baseline)");
}

struct ModelConfig {
  std::size_t d = 256;
  std::size_t heads = 16;            // h
  std::size_t spatial_layers = 16;   // L
  std::size_t temporal_layers = 16;  // L_t
  std::size_t n_max = 5;
  std::size_t d_z = 32;
  std::size_t ffn_mult = 4;
  Variant variant = Variant::factorized_encoder;

  std::size_t d_c() const { return d / 32; }
  std::size_t h_s() const { return d / 4; }
  std::size_t d_e() const { return 2 * d; }
  std::size_t d_k() const { return d / heads; }
  std::size_t temporal_head_dim() const { return d / (2 * heads); }

  void validate() const {
    if (d == 0 || d % 32 != 0) {
      throw DataError("model config: d must be a positive multiple of 32");
    }
    if (heads == 0 || d % heads != 0) {
      throw DataError("model config: d must be divisible by heads");
    }
    if (d % (2 * heads) != 0) {
      throw DataError("model config: d must be divisible by 2*heads");
    }
    if (d_e() % heads != 0) {
      throw DataError("model config: 2d must be divisible by heads");
    }
    if (spatial_layers == 0 || temporal_layers == 0 || n_max == 0 ||
        d_z == 0 || ffn_mult == 0) {
      throw DataError("model config: all dimensions must be positive");
    }
  }
};

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

/// Per-head 64x64 additive attention biases generated from the current token
/// embeddings. W_b is one tensor shared by every block of the model.
struct SmolgenParams {
  nn::Parameter* wc = nullptr;  // [d, d_c]
  nn::Parameter* wh = nullptr;  // [64*d_c, h_s]
  nn::Parameter* wg = nullptr;  // [h_s, h*h_s]
  nn::LayerNormParams ln_hidden;  // over h_s
  nn::LayerNormParams ln_heads;   // over h*h_s
  nn::Parameter* wb = nullptr;    // shared [h_s, 4096]
};

inline SmolgenParams make_smolgen(nn::ParameterStore& store,
                                  const std::string& name,
                                  const ModelConfig& cfg, nn::Parameter* wb,
                                  Rng& rng) {
  SmolgenParams p;
  p.wc = store.create(name + ".wc", {cfg.d, cfg.d_c()}, nn::Init::glorot_uniform,
                      rng);
  p.wh = store.create(name + ".wh", {64 * cfg.d_c(), cfg.h_s()},
                      nn::Init::glorot_uniform, rng);
  p.wg = store.create(name + ".wg", {cfg.h_s(), cfg.heads * cfg.h_s()},
                      nn::Init::glorot_uniform, rng);
  p.ln_hidden = nn::make_layer_norm(store, name + ".ln_hidden", cfg.h_s(), rng);
  p.ln_heads =
      nn::make_layer_norm(store, name + ".ln_heads", cfg.heads * cfg.h_s(), rng);
  p.wb = wb;
  return p;
}

/// Compression chain for `boards` stacked token groups ([boards*64, d]):
/// per board, [64,d] -> [64,d_c] -> flatten -> [h_s] -> [h*h_s] -> per head
/// [h_s] x W_b -> [64,64]. Returns one [boards*64, 64] bias per head, the
/// per-board matrices stacked vertically.
inline std::vector<nn::Node*> smolgen_bias_stacked(nn::Graph& g,
                                                   nn::Node* tokens,
                                                   const SmolgenParams& p,
                                                   const ModelConfig& cfg,
                                                   std::size_t boards) {
  nn::Node* compressed = g.matmul(tokens, g.leaf(p.wc));
  std::vector<std::vector<nn::Node*>> per_head(cfg.heads);
  for (std::size_t b = 0; b < boards; ++b) {
    nn::Node* flat = g.reshape(
        boards == 1 ? compressed
                    : g.slice_rows(compressed, b * 64, (b + 1) * 64),
        {1, 64 * cfg.d_c()});
    nn::Node* hidden =
        nn::layer_norm(g, g.mish(g.matmul(flat, g.leaf(p.wh))), p.ln_hidden);
    nn::Node* heads_vec =
        nn::layer_norm(g, g.mish(g.matmul(hidden, g.leaf(p.wg))), p.ln_heads);
    for (std::size_t j = 0; j < cfg.heads; ++j) {
      nn::Node* gj =
          g.slice_cols(heads_vec, j * cfg.h_s(), (j + 1) * cfg.h_s());
      per_head[j].push_back(g.reshape(g.matmul(gj, g.leaf(p.wb)), {64, 64}));
    }
  }
  std::vector<nn::Node*> biases;
  biases.reserve(cfg.heads);
  for (std::size_t j = 0; j < cfg.heads; ++j) {
    biases.push_back(boards == 1 ? per_head[j][0]
                                 : g.concat_rows(per_head[j]));
  }
  return biases;
}

/// Single-board Smolgen biases, one [64,64] matrix per head.
inline std::vector<nn::Node*> smolgen_bias(nn::Graph& g, nn::Node* tokens,
                                           const SmolgenParams& p,
                                           const ModelConfig& cfg) {
  return smolgen_bias_stacked(g, tokens, p, cfg, 1);
}

struct SpatialBlock {
  nn::AttentionParams attn;
  SmolgenParams smolgen;
  nn::LayerNormParams ln_attn;
  nn::FfnParams ffn;
  nn::LayerNormParams ln_ffn;
};

inline SpatialBlock make_spatial_block(nn::ParameterStore& store,
                                       const std::string& name,
                                       const ModelConfig& cfg,
                                       nn::Parameter* wb, Rng& rng) {
  SpatialBlock b;
  b.attn = nn::make_attention(store, name + ".attn", cfg.d, cfg.heads,
                              cfg.d_k(), cfg.d, rng);
  b.smolgen = make_smolgen(store, name + ".smolgen", cfg, wb, rng);
  b.ln_attn = nn::make_layer_norm(store, name + ".ln_attn", cfg.d, rng);
  b.ffn = nn::make_ffn(store, name + ".ffn", cfg.d, cfg.ffn_mult, rng);
  b.ln_ffn = nn::make_layer_norm(store, name + ".ln_ffn", cfg.d, rng);
  return b;
}

/// Biased attention, residual + LayerNorm, FFN, residual + LayerNorm.
/// `tokens` holds `boards` stacked 64-token groups; attention stays within
/// each board, all row-wise stages run on the stack at once.
inline nn::Node* spatial_block_stacked(nn::Graph& g, nn::Node* tokens,
                                       const SpatialBlock& blk,
                                       const ModelConfig& cfg,
                                       std::size_t boards) {
  auto biases = smolgen_bias_stacked(g, tokens, blk.smolgen, cfg, boards);
  nn::Node* attn = nn::grouped_self_attention(g, tokens, blk.attn, 64, biases);
  nn::Node* x = nn::layer_norm(g, g.add(tokens, attn), blk.ln_attn);
  nn::Node* f = nn::feed_forward(g, x, blk.ffn);
  return nn::layer_norm(g, g.add(x, f), blk.ln_ffn);
}

inline nn::Node* spatial_block(nn::Graph& g, nn::Node* tokens,
                               const SpatialBlock& blk,
                               const ModelConfig& cfg) {
  return spatial_block_stacked(g, tokens, blk, cfg, 1);
}

struct TokenTransformParams {
  nn::LinearParams w1;  // [d, d_z] + b
  nn::LinearParams w2;  // [64*d_z, d_e] + b
};

/// Per-token compression, flatten in square order, project to the board
/// embedding: s = concat(z_1..z_64) W_2 + b_2.
inline nn::Node* token_transform(nn::Graph& g, nn::Node* tokens,
                                 const TokenTransformParams& p,
                                 const ModelConfig& cfg) {
  nn::Node* z = nn::linear(g, tokens, p.w1);
  nn::Node* flat = g.reshape(z, {1, 64 * cfg.d_z});
  return nn::linear(g, flat, p.w2);
}

struct HeadParams {
  nn::LinearParams fc1;  // [d_e, d_e] + b
  nn::LinearParams fc2;  // [d_e, 1] + b
};

inline nn::Node* prediction_head(nn::Graph& g, nn::Node* s,
                                 const HeadParams& p) {
  return nn::linear(g, g.mish(nn::linear(g, s, p.fc1)), p.fc2);
}

struct TemporalLayer {
  nn::AttentionParams attn;
  nn::LayerNormParams ln_attn;
  nn::FfnParams ffn;
  nn::LayerNormParams ln_ffn;
};

struct FsaLayer {
  nn::AttentionParams spatial_attn;
  SmolgenParams smolgen;
  nn::LayerNormParams ln_spatial;
  nn::AttentionParams temporal_attn;  // head dim d/(2h)
  nn::LayerNormParams ln_temporal;
  nn::FfnParams ffn;
  nn::LayerNormParams ln_ffn;
};

// ---------------------------------------------------------------------------
// GlickFormer
// ---------------------------------------------------------------------------

class GlickFormer {
 public:
  GlickFormer(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng = Rng(seed).stream("init");
    const bool baseline = cfg_.variant == Variant::baseline_stacked;

    std::size_t embed_rows =
        baseline ? encoding::kChannels * cfg_.n_max : encoding::kChannels;
    embed_ = store_.create("embed", {embed_rows, cfg_.d},
                           nn::Init::glorot_uniform, rng);
    smolgen_wb_ = store_.create("smolgen.wb", {cfg_.h_s(), 64 * 64},
                                nn::Init::glorot_uniform, rng);

    if (cfg_.variant == Variant::factorized_self_attention) {
      temporal_embed_ = store_.create("temporal.embed", {cfg_.n_max, cfg_.d},
                                      nn::Init::zeros, rng);
      for (std::size_t l = 0; l < cfg_.spatial_layers; ++l) {
        std::string name = "layer." + std::to_string(l);
        FsaLayer layer;
        layer.spatial_attn = nn::make_attention(
            store_, name + ".attn", cfg_.d, cfg_.heads, cfg_.d_k(), cfg_.d, rng);
        layer.smolgen =
            make_smolgen(store_, name + ".smolgen", cfg_, smolgen_wb_, rng);
        layer.ln_spatial =
            nn::make_layer_norm(store_, name + ".ln_spatial", cfg_.d, rng);
        layer.temporal_attn = nn::make_attention(
            store_, name + ".temporal_attn", cfg_.d, cfg_.heads,
            cfg_.temporal_head_dim(), cfg_.d, rng);
        layer.ln_temporal =
            nn::make_layer_norm(store_, name + ".ln_temporal", cfg_.d, rng);
        layer.ffn = nn::make_ffn(store_, name + ".ffn", cfg_.d, cfg_.ffn_mult, rng);
        layer.ln_ffn = nn::make_layer_norm(store_, name + ".ln_ffn", cfg_.d, rng);
        fsa_.push_back(std::move(layer));
      }
    } else {
      for (std::size_t l = 0; l < cfg_.spatial_layers; ++l) {
        spatial_.push_back(make_spatial_block(
            store_, "spatial." + std::to_string(l), cfg_, smolgen_wb_, rng));
      }
    }

    token_.w1 = nn::make_linear(store_, "token.w1", cfg_.d, cfg_.d_z, true, rng);
    token_.w2 =
        nn::make_linear(store_, "token.w2", 64 * cfg_.d_z, cfg_.d_e(), true, rng);
    head_.fc1 =
        nn::make_linear(store_, "head.fc1", cfg_.d_e(), cfg_.d_e(), true, rng);
    head_.fc2 = nn::make_linear(store_, "head.fc2", cfg_.d_e(), 1, true, rng);

    if (cfg_.variant == Variant::factorized_encoder) {
      temporal_embed_ = store_.create("temporal.embed", {cfg_.n_max, cfg_.d_e()},
                                      nn::Init::zeros, rng);
      for (std::size_t l = 0; l < cfg_.temporal_layers; ++l) {
        std::string name = "temporal." + std::to_string(l);
        TemporalLayer layer;
        layer.attn =
            nn::make_attention(store_, name + ".attn", cfg_.d_e(), cfg_.heads,
                               cfg_.d_e() / cfg_.heads, cfg_.d_e(), rng);
        layer.ln_attn =
            nn::make_layer_norm(store_, name + ".ln_attn", cfg_.d_e(), rng);
        layer.ffn =
            nn::make_ffn(store_, name + ".ffn", cfg_.d_e(), cfg_.ffn_mult, rng);
        layer.ln_ffn =
            nn::make_layer_norm(store_, name + ".ln_ffn", cfg_.d_e(), rng);
        fe_temporal_.push_back(std::move(layer));
      }
    }
  }

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterStore& params() { return store_; }
  const nn::ParameterStore& params() const { return store_; }
  nn::Parameter* temporal_embed() { return temporal_embed_; }

  /// Prediction for one encoded puzzle as a scalar graph node.
  nn::Node* build(nn::Graph& g, const encoding::PuzzleEncoding& enc) const {
    check_input(enc);
    switch (cfg_.variant) {
      case Variant::factorized_encoder:
        return prediction_head(
            g, g.slice_row(build_fe_sequence(g, enc), 0), head_);
      case Variant::factorized_self_attention:
        return build_fsa(g, enc);
      case Variant::baseline_stacked:
        return build_baseline(g, enc);
    }
    throw DataError("model: bad variant");
  }

  double predict(const encoding::PuzzleEncoding& enc) const {
    nn::Graph g;
    return build(g, enc)->val().v[0];
  }

  /// Factorized Encoder temporal stage output, [n_max, d_e], for any mask
  /// pattern. Slot prediction order is exposed for sequence-level analysis.
  nn::Node* build_fe_sequence(nn::Graph& g,
                              const encoding::PuzzleEncoding& enc) const {
    if (cfg_.variant != Variant::factorized_encoder) {
      throw DataError("model: sequence output is a factorized_encoder feature");
    }
    std::vector<std::size_t> real;
    for (std::size_t n = 0; n < cfg_.n_max; ++n) {
      if (n < enc.mask.size() && enc.mask[n]) real.push_back(n);
    }
    auto boards = board_embeddings(g, enc, real);

    nn::Node* t_rows = g.leaf(temporal_embed_);
    std::vector<nn::Node*> slots(cfg_.n_max);
    for (std::size_t n = 0, r = 0; n < cfg_.n_max; ++n) {
      if (n < enc.mask.size() && enc.mask[n]) {
        slots[n] = g.add(boards[r++], g.slice_row(t_rows, n));
      } else {
        slots[n] = g.constant(nn::Tensor({1, cfg_.d_e()}));
      }
    }
    nn::Node* seq = g.stack_rows(slots);
    std::vector<std::uint8_t> mask(enc.mask.begin(), enc.mask.end());
    mask.resize(cfg_.n_max, 0);
    for (const auto& layer : fe_temporal_) {
      nn::Node* attn = nn::multi_head_attention(g, seq, seq, seq, layer.attn,
                                                {}, &mask);
      seq = nn::layer_norm(g, g.add(seq, attn), layer.ln_attn);
      nn::Node* f = nn::feed_forward(g, seq, layer.ffn);
      seq = nn::layer_norm(g, g.add(seq, f), layer.ln_ffn);
    }
    return seq;
  }

  /// One board through the spatial tower and token transform: s_n in R^{d_e}.
  nn::Node* spatial_embedding(nn::Graph& g,
                              const encoding::BoardTensor& board) const {
    nn::Node* tokens = g.matmul(g.constant(board.to_rows()), g.leaf(embed_));
    for (const auto& blk : spatial_) {
      tokens = spatial_block(g, tokens, blk, cfg_);
    }
    return token_transform(g, tokens, token_, cfg_);
  }

 private:
  void check_input(const encoding::PuzzleEncoding& enc) const {
    if (enc.n_max() != cfg_.n_max) {
      throw DataError("model: encoding n_max " + std::to_string(enc.n_max()) +
                      " does not match config n_max " +
                      std::to_string(cfg_.n_max));
    }
    if (enc.mask.empty() || !enc.mask[0]) {
      throw DataError("model: first board must be present");
    }
  }

  /// Runs the real boards of `enc` (slot list `real`) through the spatial
  /// tower as one stacked batch and returns their s_n embeddings.
  std::vector<nn::Node*> board_embeddings(
      nn::Graph& g, const encoding::PuzzleEncoding& enc,
      const std::vector<std::size_t>& real) const {
    if (real.empty()) throw DataError("model: no real boards to embed");
    const std::size_t n_boards = real.size();
    nn::Tensor rows({n_boards * 64, encoding::kChannels});
    for (std::size_t r = 0; r < n_boards; ++r) {
      nn::Tensor one = enc.boards[real[r]].to_rows();
      std::copy(one.v.begin(), one.v.end(), rows.v.begin() + r * one.size());
    }
    nn::Node* stacked = g.matmul(g.constant(std::move(rows)), g.leaf(embed_));
    for (const auto& blk : spatial_) {
      stacked = spatial_block_stacked(g, stacked, blk, cfg_, n_boards);
    }
    nn::Node* z_all = nn::linear(g, stacked, token_.w1);
    std::vector<nn::Node*> out(n_boards);
    for (std::size_t r = 0; r < n_boards; ++r) {
      nn::Node* flat = g.reshape(
          n_boards == 1 ? z_all : g.slice_rows(z_all, r * 64, (r + 1) * 64),
          {1, 64 * cfg_.d_z});
      out[r] = nn::linear(g, flat, token_.w2);
    }
    return out;
  }

  nn::Node* build_fsa(nn::Graph& g, const encoding::PuzzleEncoding& enc) const {
    const std::size_t n_boards = enc.count;
    const std::size_t rows = n_boards * 64;

    nn::Tensor board_rows({rows, encoding::kChannels});
    for (std::size_t n = 0; n < n_boards; ++n) {
      nn::Tensor one = enc.boards[n].to_rows();
      std::copy(one.v.begin(), one.v.end(),
                board_rows.v.begin() + n * one.size());
    }
    nn::Node* stacked =
        g.matmul(g.constant(std::move(board_rows)), g.leaf(embed_));

    // Temporal position n added to all 64 tokens of board n.
    std::vector<std::size_t> t_idx(rows);
    for (std::size_t n = 0; n < n_boards; ++n) {
      for (std::size_t sq = 0; sq < 64; ++sq) t_idx[n * 64 + sq] = n;
    }
    stacked = g.add(stacked, g.gather_rows(g.leaf(temporal_embed_), t_idx));

    // Board-major <-> square-major permutations for the temporal stage.
    std::vector<std::size_t> to_sq_major(rows), to_board_major(rows);
    for (std::size_t sq = 0; sq < 64; ++sq) {
      for (std::size_t n = 0; n < n_boards; ++n) {
        to_sq_major[sq * n_boards + n] = n * 64 + sq;
      }
    }
    for (std::size_t n = 0; n < n_boards; ++n) {
      for (std::size_t sq = 0; sq < 64; ++sq) {
        to_board_major[n * 64 + sq] = sq * n_boards + n;
      }
    }

    for (const auto& layer : fsa_) {
      auto biases =
          smolgen_bias_stacked(g, stacked, layer.smolgen, cfg_, n_boards);
      nn::Node* attn =
          nn::grouped_self_attention(g, stacked, layer.spatial_attn, 64, biases);
      stacked = nn::layer_norm(g, g.add(stacked, attn), layer.ln_spatial);

      // Per-square attention across boards; with one board this degenerates
      // to single-key attention.
      nn::Node* sq_major = n_boards == 1
                               ? stacked
                               : g.gather_rows(stacked, to_sq_major);
      nn::Node* tattn = nn::grouped_self_attention(g, sq_major,
                                                   layer.temporal_attn, n_boards);
      if (n_boards > 1) tattn = g.gather_rows(tattn, to_board_major);
      stacked = nn::layer_norm(g, g.add(stacked, tattn), layer.ln_temporal);

      nn::Node* f = nn::feed_forward(g, stacked, layer.ffn);
      stacked = nn::layer_norm(g, g.add(stacked, f), layer.ln_ffn);
    }
    nn::Node* first =
        n_boards == 1 ? stacked : g.slice_rows(stacked, 0, 64);
    nn::Node* s1 = token_transform(g, first, token_, cfg_);
    return prediction_head(g, s1, head_);
  }

  nn::Node* build_baseline(nn::Graph& g,
                           const encoding::PuzzleEncoding& enc) const {
    // All n_max boards stacked along channels: [64, 16*n_max].
    nn::Tensor input({64, encoding::kChannels * cfg_.n_max});
    for (std::size_t n = 0; n < cfg_.n_max; ++n) {
      if (!enc.mask[n]) continue;  // padded channels stay zero
      for (int s = 0; s < 64; ++s) {
        for (std::size_t c = 0; c < encoding::kChannels; ++c) {
          input.at(s, n * encoding::kChannels + c) =
              enc.boards[n].get(c, s) ? 1.0 : 0.0;
        }
      }
    }
    nn::Node* tokens = g.matmul(g.constant(std::move(input)), g.leaf(embed_));
    for (const auto& blk : spatial_) {
      tokens = spatial_block(g, tokens, blk, cfg_);
    }
    nn::Node* s = token_transform(g, tokens, token_, cfg_);
    return prediction_head(g, s, head_);
  }

  ModelConfig cfg_;
  nn::ParameterStore store_;
  nn::Parameter* embed_ = nullptr;
  nn::Parameter* smolgen_wb_ = nullptr;
  nn::Parameter* temporal_embed_ = nullptr;
  std::vector<SpatialBlock> spatial_;
  std::vector<FsaLayer> fsa_;
  std::vector<TemporalLayer> fe_temporal_;
  TokenTransformParams token_;
  HeadParams head_;
};

// ---------------------------------------------------------------------------
// Config sidecar (key = value text next to a checkpoint)
// ---------------------------------------------------------------------------

struct ModelMeta {
  ModelConfig config;
  puzzles::StandardizationParams standardization;
};

inline void save_model_meta(const ModelMeta& meta, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("meta: cannot open for writing: " + path);
  const ModelConfig& c = meta.config;
  out << "variant = " << variant_tag(c.variant) << "\n"
      << "d = " << c.d << "\n"
      << "heads = " << c.heads << "\n"
      << "spatial_layers = " << c.spatial_layers << "\n"
      << "temporal_layers = " << c.temporal_layers << "\n"
      << "n_max = " << c.n_max << "\n"
      << "d_z = " << c.d_z << "\n"
      << "ffn_mult = " << c.ffn_mult << "\n"
      << "d_c = " << c.d_c() << "\n"
      << "h_s = " << c.h_s() << "\n"
      << "d_e = " << c.d_e() << "\n"
      << "d_k = " << c.d_k() << "\n"
      << "temporal_head_dim = " << c.temporal_head_dim() << "\n"
      << "rating_mean = " << meta.standardization.mean << "\n"
      << "rating_std = " << meta.standardization.std << "\n";
  if (!out) throw DataError("meta: write failed: " + path);
}

inline ModelMeta load_model_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("meta: cannot open: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("meta: missing key '" + key + "'");
    return it->second;
  };
  ModelMeta meta;
  meta.config.variant = variant_from_tag(need("variant"));
  meta.config.d = std::stoul(need("d"));
  meta.config.heads = std::stoul(need("heads"));
  meta.config.spatial_layers = std::stoul(need("spatial_layers"));
  meta.config.temporal_layers = std::stoul(need("temporal_layers"));
  meta.config.n_max = std::stoul(need("n_max"));
  meta.config.d_z = std::stoul(need("d_z"));
  meta.config.ffn_mult = std::stoul(need("ffn_mult"));
  meta.standardization.mean = std::stod(need("rating_mean"));
  meta.standardization.std = std::stod(need("rating_std"));
  meta.config.validate();
  return meta;
}

}  // namespace glick::model
