#include <catch_amalgamated.hpp>

#include <filesystem>

#include "glickformer/encoding.hpp"
#include "support/gamegen.hpp"

using namespace glick;
using namespace glick::encoding;

namespace {

puzzles::PuzzleRecord to_record(const gamegen::Puzzle& p) {
  puzzles::PuzzleRecord r;
  r.id = p.id;
  r.fen = p.fen;
  for (const auto& m : p.moves) r.moves.push_back(chess::parse_uci(m));
  r.rating = p.rating;
  r.rating_deviation = p.rating_deviation;
  return r;
}

bool tensor_invariants_hold(const BoardTensor& b) {
  // At most one piece per square, exactly one king per side, one bit per
  // move channel.
  for (int s = 0; s < 64; ++s) {
    int pieces = 0;
    for (std::size_t c = 0; c < 12; ++c) pieces += b.get(c, s);
    if (pieces > 1) return false;
  }
  if (b.popcount(0) != 1 || b.popcount(6) != 1) return false;
  for (std::size_t c = kPrevFrom; c <= kNextTo; ++c) {
    if (b.popcount(c) != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("encode_board mirrors the opening position for the black solver") {
  // Startpos after e2e4; Black is the solver, so the board is mirrored.
  chess::BoardState state =
      chess::apply_move(chess::start_position(), chess::parse_uci("e2e4"));
  REQUIRE(state.side_to_move == chess::Color::black);
  chess::BoardState view = chess::mirror(state);
  chess::Move prev = chess::mirror_move(chess::parse_uci("e2e4"));
  chess::Move next = chess::mirror_move(chess::parse_uci("e7e5"));
  BoardTensor b = encode_board(view, prev, next);

  CHECK(b.popcount(5) == 8);  // mover pawns
  CHECK(b.popcount(11) == 8); // opponent pawns
  // prev.to lands on the mirrored e4 square, which is e5 (index 36).
  CHECK(b.popcount(kPrevTo) == 1);
  CHECK(b.get(kPrevTo, chess::Square::from_name("e5").index));
  CHECK(b.get(kPrevFrom, chess::Square::from_name("e7").index));
  // next = e7e5 mirrored = e2e4.
  CHECK(b.get(kNextFrom, chess::Square::from_name("e2").index));
  CHECK(b.get(kNextTo, chess::Square::from_name("e4").index));
  CHECK(tensor_invariants_hold(b));
}

TEST_CASE("encode_board on a kings-only board sets two piece bits") {
  chess::BoardState b = chess::parse_fen("8/8/8/8/8/8/8/K6k w - - 0 1");
  BoardTensor t = encode_board(b, chess::parse_uci("a2a1"),
                               chess::parse_uci("h2h1"));
  int piece_bits = 0;
  for (std::size_t c = 0; c < 12; ++c) piece_bits += t.popcount(c);
  CHECK(piece_bits == 2);
  CHECK(t.get(0, chess::Square::from_name("a1").index));  // mover king
  CHECK(t.get(6, chess::Square::from_name("h1").index));  // opponent king
}

TEST_CASE("encode_puzzle counts boards by the alternate-position rule") {
  gamegen::CorpusOptions opt;
  opt.count = 40;
  opt.seed = 31;
  opt.min_moves = 4;
  opt.max_moves = 4;
  opt.even_moves_only = true;
  auto corpus = gamegen::make_corpus(opt);

  auto enc = encode_puzzle(to_record(corpus[0]), 5, {});
  CHECK(enc.count == 2);  // M = 4: boards after moves 1 and 3
  CHECK(enc.mask == std::vector<std::uint8_t>{1, 1, 0, 0, 0});
  for (std::size_t n = enc.count; n < enc.n_max(); ++n) {
    CHECK(enc.boards[n].is_zero());
  }
}

TEST_CASE("encode_puzzle handles the shortest and truncated puzzles") {
  gamegen::CorpusOptions opt;
  opt.count = 10;
  opt.seed = 32;
  opt.min_moves = 2;
  opt.max_moves = 2;
  auto two = gamegen::make_corpus(opt);
  auto enc2 = encode_puzzle(to_record(two[0]), 3, {});
  CHECK(enc2.count == 1);
  CHECK(enc2.mask == std::vector<std::uint8_t>{1, 0, 0});

  opt.seed = 33;
  opt.min_moves = 14;
  opt.max_moves = 14;
  auto fourteen = gamegen::make_corpus(opt);
  auto enc14 = encode_puzzle(to_record(fourteen[0]), 5, {});
  CHECK(enc14.count == 5);  // ceil((14-1)/2) = 7, capped at 5
  CHECK(enc14.mask == std::vector<std::uint8_t>{1, 1, 1, 1, 1});

  // Odd-length line: the final mover move has no solver reply.
  opt.seed = 34;
  opt.min_moves = 5;
  opt.max_moves = 5;
  auto five = gamegen::make_corpus(opt);
  auto enc5 = encode_puzzle(to_record(five[0]), 5, {});
  CHECK(enc5.count == 2);
}

TEST_CASE("board count matches a direct replay enumeration on a corpus") {
  gamegen::CorpusOptions opt;
  opt.count = 1000;
  opt.seed = 35;
  auto corpus = gamegen::make_corpus(opt);
  const std::size_t n_max = 5;
  for (const auto& p : corpus) {
    auto rec = to_record(p);
    auto enc = encode_puzzle(rec, n_max, {});
    // Oracle: walk the move list; a board exists at every position where
    // the solver is to move (after odd-numbered moves) and a reply exists.
    std::size_t expected = 0;
    for (std::size_t i = 0; i < rec.moves.size(); ++i) {
      if (i % 2 == 0 && i + 1 < rec.moves.size()) ++expected;
    }
    expected = std::min(expected, n_max);
    REQUIRE(enc.count == expected);
    for (std::size_t n = 0; n < enc.count; ++n) {
      REQUIRE(tensor_invariants_hold(enc.boards[n]));
    }
  }
}

TEST_CASE("color symmetry: mirrored construction encodes identically") {
  gamegen::CorpusOptions opt;
  opt.count = 200;
  opt.seed = 36;
  auto corpus = gamegen::make_corpus(opt);
  for (const auto& p : corpus) {
    auto rec = to_record(p);
    puzzles::PuzzleRecord flipped = rec;
    flipped.fen = chess::serialize_fen(chess::mirror(chess::parse_fen(rec.fen)));
    for (auto& m : flipped.moves) m = chess::mirror_move(m);
    auto a = encode_puzzle(rec, 5, {});
    auto b = encode_puzzle(flipped, 5, {});
    REQUIRE(a.count == b.count);
    for (std::size_t n = 0; n < a.count; ++n) {
      REQUIRE(a.boards[n] == b.boards[n]);
    }
  }
}

TEST_CASE("encode_puzzle reports the puzzle id and move index on failure") {
  puzzles::PuzzleRecord rec;
  rec.id = "brokenx";
  rec.fen = chess::serialize_fen(chess::start_position());
  rec.moves = {chess::parse_uci("e2e4"), chess::parse_uci("a5a4")};
  rec.rating = 1500;
  rec.rating_deviation = 80;
  CHECK_THROWS_WITH(encode_puzzle(rec, 5, {}),
                    Catch::Matchers::ContainsSubstring("brokenx") &&
                        Catch::Matchers::ContainsSubstring("move 2"));
}

TEST_CASE("encode_puzzle rejects records with fewer than two moves") {
  puzzles::PuzzleRecord rec;
  rec.id = "tiny";
  rec.fen = chess::serialize_fen(chess::start_position());
  rec.moves = {chess::parse_uci("e2e4")};
  CHECK_THROWS_AS(encode_puzzle(rec, 5, {}), DataError);
}

TEST_CASE("targets are standardized into the encoding") {
  gamegen::CorpusOptions opt;
  opt.count = 5;
  opt.seed = 37;
  auto corpus = gamegen::make_corpus(opt);
  auto rec = to_record(corpus[0]);
  puzzles::StandardizationParams sp;
  auto enc = encode_puzzle(rec, 5, sp);
  CHECK(enc.target.mu ==
        Catch::Approx((rec.rating - sp.mean) / sp.std));
  CHECK(enc.target.phi == Catch::Approx(rec.rating_deviation / sp.std));
}

TEST_CASE("shard files round-trip encodings") {
  gamegen::CorpusOptions opt;
  opt.count = 64;
  opt.seed = 38;
  auto corpus = gamegen::make_corpus(opt);
  puzzles::StandardizationParams sp;
  std::vector<PuzzleEncoding> encs;
  for (const auto& p : corpus) {
    encs.push_back(encode_puzzle(to_record(p), 5, sp));
  }
  auto path =
      (std::filesystem::temp_directory_path() / "glkf_roundtrip.glkf").string();
  write_shard(encs, 5, path);
  auto back = read_shard(path);
  std::filesystem::remove(path);

  REQUIRE(back.n_max == 5);
  REQUIRE(back.encodings.size() == encs.size());
  for (std::size_t i = 0; i < encs.size(); ++i) {
    const auto& a = encs[i];
    const auto& b = back.encodings[i];
    REQUIRE(a.count == b.count);
    REQUIRE(a.mask == b.mask);
    for (std::size_t n = 0; n < 5; ++n) REQUIRE(a.boards[n] == b.boards[n]);
    // Targets travel as f32.
    CHECK(b.target.mu == Catch::Approx(static_cast<float>(a.target.mu)));
    CHECK(b.target.phi == Catch::Approx(static_cast<float>(a.target.phi)));
  }
}

TEST_CASE("shards refuse n_max beyond the mask byte") {
  std::vector<PuzzleEncoding> none;
  CHECK_THROWS_AS(write_shard(none, 9, "/tmp/glkf_bad.glkf"), DataError);
}

TEST_CASE("solver_move_count is the untruncated board count") {
  puzzles::PuzzleRecord rec;
  rec.moves.resize(14);
  CHECK(solver_move_count(rec) == 7);
  rec.moves.resize(5);
  CHECK(solver_move_count(rec) == 2);
}
