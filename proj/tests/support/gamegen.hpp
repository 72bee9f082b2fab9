#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glickformer/rng.hpp"

// Test-support chess engine, written independently of glickformer/chess.hpp
// so the two implementations can check each other. Unlike the library, this
// one generates fully legal moves (castling, en passant, promotions, check
// evasion) and is used to synthesize Lichess-schema puzzle corpora.
namespace gamegen {

// Square 0 = a1, 63 = h8. Pieces: +1..+6 = white K,Q,R,B,N,P; negative =
// black; 0 = empty.
struct Board {
  std::int8_t sq[64] = {0};
  bool white_to_move = true;
  bool castle[4] = {false, false, false, false};  // K Q k q
  int ep = -1;
  int halfmove = 0;
  int fullmove = 1;
};

struct Move {
  int from = 0;
  int to = 0;
  int promo = 0;  // 0 none, else 2..5 = Q,R,B,N
};

Board start_board();
std::string board_fen(const Board& b);
std::string move_uci(const Move& m);
bool in_check(const Board& b, bool white);
std::vector<Move> legal_moves(const Board& b);
Board apply(const Board& b, const Move& m);

struct Puzzle {
  std::string id;
  std::string fen;
  std::vector<std::string> moves;  // UCI, first move is the setup move
  int rating = 0;
  int rating_deviation = 0;
  int popularity = 0;
  int nb_plays = 0;
  std::string themes;
  std::string game_url;
  std::string opening_tags;
};

struct CorpusOptions {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  // Inclusive range of solution lengths (moves column entries).
  std::size_t min_moves = 2;
  std::size_t max_moves = 12;
  bool even_moves_only = false;
  // Zero keeps the feature-driven synthetic difficulty; a positive value
  // forces every rating deviation to it.
  int fixed_rd = 0;
};

/// Plays random legal games and cuts puzzle windows out of them. Ratings
/// follow a feature-based difficulty heuristic (solution length, captures,
/// promotions, checks) plus noise, so difficulty is learnable from the
/// encoded puzzle.
std::vector<Puzzle> make_corpus(const CorpusOptions& opt);

void write_csv(const std::vector<Puzzle>& puzzles, const std::string& path);

}  // namespace gamegen
