#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "glickformer/chess.hpp"
#include "glickformer/errors.hpp"
#include "glickformer/puzzles.hpp"
#include "glickformer/tensor.hpp"

namespace glick::encoding {

// Channel layout of one encoded position (mover's perspective):
//   0-5   mover pieces, king..pawn
//   6-11  opponent pieces, king..pawn
//   12/13 previous move from/to
//   14/15 next move from/to
inline constexpr std::size_t kChannels = 16;
inline constexpr std::size_t kPrevFrom = 12;
inline constexpr std::size_t kPrevTo = 13;
inline constexpr std::size_t kNextFrom = 14;
inline constexpr std::size_t kNextTo = 15;

/// Binary 16x8x8 tensor, one 64-bit mask per channel (bit i = square index i).
struct BoardTensor {
  std::array<std::uint64_t, kChannels> ch{};

  bool get(std::size_t channel, int square) const {
    return (ch[channel] >> square) & 1ULL;
  }
  void set(std::size_t channel, int square) {
    ch[channel] |= 1ULL << square;
  }
  int popcount(std::size_t channel) const {
    return std::popcount(ch[channel]);
  }
  bool is_zero() const {
    for (auto m : ch) {
      if (m) return false;
    }
    return true;
  }
  bool operator==(const BoardTensor&) const = default;

  /// Square-major [64, 16] f64 view for the model's tokenizer.
  nn::Tensor to_rows() const {
    nn::Tensor t({64, kChannels});
    for (int s = 0; s < 64; ++s) {
      for (std::size_t c = 0; c < kChannels; ++c) {
        t.at(s, c) = get(c, s) ? 1.0 : 0.0;
      }
    }
    return t;
  }
};

/// A puzzle as the model sees it: up to n_max solver-to-move boards, a
/// leading-true mask, and the standardized (mu, phi) target. Slots past
/// `count` hold all-zero boards.
struct PuzzleEncoding {
  std::vector<BoardTensor> boards;  // size n_max
  std::vector<std::uint8_t> mask;   // size n_max, 1 = real board
  std::size_t count = 0;
  puzzles::StandardizedTarget target;

  std::size_t n_max() const { return boards.size(); }
};

/// Encodes one position. `state`, `prev` and `next` must already be in the
/// solver's perspective (mover to move; mirrored when the solver is Black).
inline BoardTensor encode_board(const chess::BoardState& state,
                                const chess::Move& prev,
                                const chess::Move& next) {
  BoardTensor b;
  const chess::Color mover = state.side_to_move;
  for (int s = 0; s < 64; ++s) {
    auto p = state.piece_at(chess::Square{s});
    if (!p) continue;
    std::size_t base = p->color == mover ? 0 : 6;
    b.set(base + static_cast<std::size_t>(p->kind), s);
  }
  b.set(kPrevFrom, prev.from.index);
  b.set(kPrevTo, prev.to.index);
  b.set(kNextFrom, next.from.index);
  b.set(kNextTo, next.to.index);
  return b;
}

/// Replays `moves` from `fen` and encodes the solver-to-move positions.
/// With moves m_1..m_M, board j is the state after m_1..m_{2j-1}, with
/// prev = m_{2j-1} and next = m_{2j}; the count is min(floor(M/2), n_max).
/// All boards are mirrored when the position after m_1 has Black to move.
/// The full move list is replayed so bad rows fail loudly even when
/// truncation would hide them.
inline std::vector<BoardTensor> encode_boards(
    const std::string& fen, const std::vector<chess::Move>& moves,
    std::size_t n_max, const std::string& context_id = "") {
  if (moves.size() < 2) {
    throw DataError("encode: puzzle " + context_id +
                    " has fewer than two moves");
  }
  if (n_max < 1) throw DataError("encode: n_max must be >= 1");

  chess::BoardState state;
  try {
    state = chess::parse_fen(fen);
  } catch (const ParseError& e) {
    throw DataError("encode: puzzle " + context_id + ": " + e.what());
  }

  const std::size_t want = std::min(moves.size() / 2, n_max);
  std::vector<BoardTensor> out;
  out.reserve(want);
  bool mirrored = false;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    try {
      state = chess::apply_move(state, moves[i]);
    } catch (const DataError& e) {
      throw DataError("encode: puzzle " + context_id + " move " +
                      std::to_string(i + 1) + ": " + e.what());
    }
    if (i == 0) mirrored = state.side_to_move == chess::Color::black;
    // Positions after odd-numbered moves are the solver's turns.
    if (i % 2 == 0 && out.size() < want) {
      chess::BoardState view = mirrored ? chess::mirror(state) : state;
      chess::Move prev = mirrored ? chess::mirror_move(moves[i]) : moves[i];
      chess::Move next =
          mirrored ? chess::mirror_move(moves[i + 1]) : moves[i + 1];
      out.push_back(encode_board(view, prev, next));
    }
  }
  return out;
}

inline PuzzleEncoding encode_puzzle(const puzzles::PuzzleRecord& record,
                                    std::size_t n_max,
                                    const puzzles::StandardizationParams& sp) {
  PuzzleEncoding enc;
  auto boards = encode_boards(record.fen, record.moves, n_max, record.id);
  enc.count = boards.size();
  enc.boards = std::move(boards);
  enc.boards.resize(n_max);  // zero padding
  enc.mask.assign(n_max, 0);
  for (std::size_t i = 0; i < enc.count; ++i) enc.mask[i] = 1;
  enc.target = puzzles::make_target(record, sp);
  return enc;
}

/// Solver moves available in a record's full solution line (pre-truncation).
inline std::size_t solver_move_count(const puzzles::PuzzleRecord& r) {
  return r.moves.size() / 2;
}

// ---------------------------------------------------------------------------
// Shards ("GLKF"): pre-encoded datasets, little-endian.
//   header: magic "GLKF" | version u32 | n_max u32 | record count u64
//   record: board count u8 | mask bits u8 | 16*8*8*n_max packed bits |
//           mu f32 | phi f32
// Bit k of the packed block is board (k/1024), channel (k/64)%16,
// square k%64; bytes fill LSB-first, which makes each channel one
// little-endian u64.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("shard: truncated file");
  return v;
}

}  // namespace detail

inline void write_shard(const std::vector<PuzzleEncoding>& encodings,
                        std::size_t n_max, const std::string& path) {
  if (n_max > 8) throw DataError("shard: n_max > 8 does not fit the mask byte");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("shard: cannot open for writing: " + path);
  out.write("GLKF", 4);
  detail::write_raw<std::uint32_t>(out, 1);
  detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(n_max));
  detail::write_raw<std::uint64_t>(out,
                                   static_cast<std::uint64_t>(encodings.size()));
  for (const auto& enc : encodings) {
    if (enc.n_max() != n_max) throw DataError("shard: mixed n_max");
    detail::write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(enc.count));
    std::uint8_t mask_bits = 0;
    for (std::size_t i = 0; i < n_max; ++i) {
      if (enc.mask[i]) mask_bits |= static_cast<std::uint8_t>(1u << i);
    }
    detail::write_raw<std::uint8_t>(out, mask_bits);
    for (const auto& board : enc.boards) {
      for (auto m : board.ch) detail::write_raw<std::uint64_t>(out, m);
    }
    detail::write_raw<float>(out, static_cast<float>(enc.target.mu));
    detail::write_raw<float>(out, static_cast<float>(enc.target.phi));
  }
  if (!out) throw DataError("shard: write failed: " + path);
}

struct ShardData {
  std::size_t n_max = 0;
  std::vector<PuzzleEncoding> encodings;
};

inline ShardData read_shard(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("shard: cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != "GLKF") {
    throw DataError("shard: bad magic in " + path);
  }
  auto version = detail::read_raw<std::uint32_t>(in);
  if (version != 1) {
    throw DataError("shard: unsupported version " + std::to_string(version));
  }
  ShardData data;
  data.n_max = detail::read_raw<std::uint32_t>(in);
  auto count = detail::read_raw<std::uint64_t>(in);
  data.encodings.reserve(count);
  for (std::uint64_t r = 0; r < count; ++r) {
    PuzzleEncoding enc;
    enc.count = detail::read_raw<std::uint8_t>(in);
    auto mask_bits = detail::read_raw<std::uint8_t>(in);
    enc.mask.assign(data.n_max, 0);
    for (std::size_t i = 0; i < data.n_max; ++i) {
      enc.mask[i] = (mask_bits >> i) & 1u;
    }
    enc.boards.resize(data.n_max);
    for (auto& board : enc.boards) {
      for (auto& m : board.ch) m = detail::read_raw<std::uint64_t>(in);
    }
    enc.target.mu = detail::read_raw<float>(in);
    enc.target.phi = detail::read_raw<float>(in);
    data.encodings.push_back(std::move(enc));
  }
  return data;
}

}  // namespace glick::encoding
