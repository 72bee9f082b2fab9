#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "glickformer/chess.hpp"
#include "glickformer/errors.hpp"
#include "glickformer/rng.hpp"

namespace glick::puzzles {

/// One Lichess puzzle row.
struct PuzzleRecord {
  std::string id;
  std::string fen;
  std::vector<chess::Move> moves;
  int rating = 0;            // Glicko-2 points
  int rating_deviation = 0;  // Glicko-2 points, > 0
  int popularity = 0;
  int nb_plays = 0;
  std::vector<std::string> themes;
  std::string game_url;
  std::vector<std::string> opening_tags;
};

struct StandardizationParams {
  double mean = 1516.0;
  double std = 543.0;
};

struct StandardizedTarget {
  double mu = 0.0;   // (r - mean) / std
  double phi = 0.0;  // RD / std
};

inline double standardize(double rating, const StandardizationParams& p) {
  if (p.std <= 0.0) throw DataError("standardize: std must be > 0");
  return (rating - p.mean) / p.std;
}

inline double unstandardize(double mu, const StandardizationParams& p) {
  return mu * p.std + p.mean;
}

inline double standardize_deviation(double rd, const StandardizationParams& p) {
  if (p.std <= 0.0) throw DataError("standardize_deviation: std must be > 0");
  return rd / p.std;
}

inline StandardizedTarget make_target(const PuzzleRecord& r,
                                      const StandardizationParams& p) {
  return {standardize(r.rating, p), standardize_deviation(r.rating_deviation, p)};
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

/// RFC-4180-ish field split: commas, double quotes, "" as escaped quote.
inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline bool parse_int_field(const std::string& s, int& out) {
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    out = std::stoi(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace detail

struct LoadResult {
  std::vector<PuzzleRecord> records;
  std::size_t total_rows = 0;  // data rows seen (header excluded)
  std::size_t skipped = 0;
};

/// Reads a Lichess puzzle CSV. Rows that fail validation (bad FEN, fewer than
/// two moves, non-positive RD, malformed numerics) are skipped and counted;
/// a missing schema column is fatal. Row order of kept records is preserved.
inline LoadResult load_puzzles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_puzzles: cannot open " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw DataError("load_puzzles: empty file " + path);
  }
  auto header = detail::split_csv_row(header_line);
  static const char* kColumns[] = {
      "PuzzleId", "FEN",     "Moves",   "Rating",  "RatingDeviation",
      "Popularity", "NbPlays", "Themes", "GameUrl", "OpeningTags"};
  int col[10];
  for (int c = 0; c < 10; ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw DataError(std::string("load_puzzles: missing column ") +
                      kColumns[c]);
    }
    col[c] = static_cast<int>(it - header.begin());
  }

  LoadResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++result.total_rows;
    auto fields = detail::split_csv_row(line);
    if (fields.size() != header.size()) {
      ++result.skipped;
      continue;
    }
    PuzzleRecord r;
    r.id = fields[col[0]];
    r.fen = fields[col[1]];
    bool ok = detail::parse_int_field(fields[col[3]], r.rating) &&
              detail::parse_int_field(fields[col[4]], r.rating_deviation) &&
              detail::parse_int_field(fields[col[5]], r.popularity) &&
              detail::parse_int_field(fields[col[6]], r.nb_plays) &&
              r.rating_deviation > 0;
    if (ok) {
      try {
        chess::parse_fen(r.fen);
        for (const auto& tok : detail::split_tokens(fields[col[2]])) {
          r.moves.push_back(chess::parse_uci(tok));
        }
      } catch (const ParseError&) {
        ok = false;
      }
    }
    // A puzzle needs at least one solver move, i.e. two listed moves.
    if (ok && r.moves.size() < 2) ok = false;
    if (!ok) {
      ++result.skipped;
      continue;
    }
    r.themes = detail::split_tokens(fields[col[7]]);
    r.game_url = fields[col[8]];
    r.opening_tags = detail::split_tokens(fields[col[9]]);
    result.records.push_back(std::move(r));
  }

  std::fprintf(stderr, "load_puzzles: total=%zu kept=%zu skipped=%zu\n",
               result.total_rows, result.records.size(), result.skipped);
  return result;
}

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct Split {
  std::vector<PuzzleRecord> train;
  std::vector<PuzzleRecord> test;
};

/// Deterministic disjoint partition; |test| = round(fraction * N). Row order
/// is preserved inside each side.
inline Split split(const std::vector<PuzzleRecord>& records,
                   std::uint64_t seed, double test_fraction) {
  if (records.empty()) throw DataError("split: empty input");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DataError("split: test_fraction must be in (0,1)");
  }
  const std::size_t n = records.size();
  auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng(seed).stream("split");
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = rng.next_below(i + 1);
    std::swap(idx[i], idx[j]);
  }
  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[idx[i]] = true;

  Split out;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? out.test : out.train).push_back(records[i]);
  }
  return out;
}

}  // namespace glick::puzzles
