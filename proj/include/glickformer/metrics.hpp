#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glickformer/encoding.hpp"
#include "glickformer/model.hpp"
#include "glickformer/parallel.hpp"

namespace glick::metrics {

struct Prediction {
  std::string puzzle_id;
  double predicted_rating = 0.0;  // Glicko-2 points, unstandardized
  double true_rating = 0.0;
  double rating_deviation = 0.0;  // > 0
  std::size_t solver_move_count = 0;
};

struct LengthBucket {
  double mae = 0.0;
  std::size_t count = 0;
};

struct MetricsReport {
  double mae = 0.0;
  double maz = 0.0;
  std::map<int, double> acc_within;           // k in {1,2,3} -> percentage
  std::map<std::size_t, LengthBucket> mae_by_moves;
  std::size_t n = 0;
  std::size_t encode_failures = 0;
};

inline double mae(std::span<const Prediction> preds) {
  if (preds.empty()) throw DataError("mae: empty prediction set");
  double acc = 0.0;
  for (const auto& p : preds) {
    acc += std::abs(p.true_rating - p.predicted_rating);
  }
  return acc / static_cast<double>(preds.size());
}

/// Mean absolute error normalized by each puzzle's rating deviation.
inline double maz(std::span<const Prediction> preds) {
  if (preds.empty()) throw DataError("maz: empty prediction set");
  double acc = 0.0;
  for (const auto& p : preds) {
    if (p.rating_deviation <= 0.0) {
      throw DataError("maz: non-positive rating deviation for puzzle " +
                      p.puzzle_id);
    }
    acc += std::abs((p.true_rating - p.predicted_rating) / p.rating_deviation);
  }
  return acc / static_cast<double>(preds.size());
}

/// Percentage of predictions with |error| <= k * RD. Boundary equality
/// counts as inside.
inline double accuracy_within(std::span<const Prediction> preds, int k) {
  if (preds.empty()) throw DataError("accuracy_within: empty prediction set");
  if (k < 1) throw DataError("accuracy_within: k must be >= 1");
  std::size_t hits = 0;
  for (const auto& p : preds) {
    if (std::abs(p.true_rating - p.predicted_rating) <=
        static_cast<double>(k) * p.rating_deviation) {
      ++hits;
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(preds.size());
}

inline std::map<std::size_t, LengthBucket> mae_by_solution_length(
    std::span<const Prediction> preds) {
  std::map<std::size_t, LengthBucket> buckets;
  for (const auto& p : preds) {
    auto& b = buckets[p.solver_move_count];
    b.mae += std::abs(p.true_rating - p.predicted_rating);
    b.count += 1;
  }
  for (auto& [_, b] : buckets) b.mae /= static_cast<double>(b.count);
  return buckets;
}

inline MetricsReport report_from_predictions(std::span<const Prediction> preds,
                                             std::size_t encode_failures = 0) {
  MetricsReport r;
  r.mae = mae(preds);
  r.maz = maz(preds);
  for (int k = 1; k <= 3; ++k) r.acc_within[k] = accuracy_within(preds, k);
  r.mae_by_moves = mae_by_solution_length(preds);
  r.n = preds.size();
  r.encode_failures = encode_failures;
  return r;
}

// ---------------------------------------------------------------------------
// Model evaluation
// ---------------------------------------------------------------------------

/// Runs the model over a record set and scores it. Predictions use mu
/// directly (no target sampling) and are unstandardized via the given
/// parameters. Records that fail to encode are excluded and counted.
inline MetricsReport evaluate(const model::GlickFormer& m,
                              const std::vector<puzzles::PuzzleRecord>& records,
                              const puzzles::StandardizationParams& sp) {
  if (records.empty()) throw DataError("evaluate: empty dataset");

  struct Slot {
    bool ok = false;
    encoding::PuzzleEncoding enc;
    std::size_t moves = 0;
  };
  std::vector<Slot> slots(records.size());
  std::size_t failures = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      slots[i].enc = encoding::encode_puzzle(records[i], m.config().n_max, sp);
      slots[i].moves = encoding::solver_move_count(records[i]);
      slots[i].ok = true;
    } catch (const DataError& e) {
      std::fprintf(stderr, "evaluate: skipping %s: %s\n", records[i].id.c_str(),
                   e.what());
      ++failures;
    }
  }

  std::vector<double> raw(records.size(), 0.0);
  parallel_chunks(records.size(),
                  [&](std::size_t, std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i) {
                      if (slots[i].ok) raw[i] = m.predict(slots[i].enc);
                    }
                  });

  std::vector<Prediction> preds;
  preds.reserve(records.size() - failures);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!slots[i].ok) continue;
    Prediction p;
    p.puzzle_id = records[i].id;
    p.predicted_rating = puzzles::unstandardize(raw[i], sp);
    p.true_rating = records[i].rating;
    p.rating_deviation = records[i].rating_deviation;
    p.solver_move_count = slots[i].moves;
    preds.push_back(std::move(p));
  }
  if (preds.empty()) throw DataError("evaluate: no record could be scored");
  return report_from_predictions(preds, failures);
}

/// Same scoring for pre-encoded shards. True ratings are reconstructed from
/// the stored (mu, phi); the per-length breakdown uses the stored (possibly
/// truncated) board count.
inline MetricsReport evaluate_encoded(
    const model::GlickFormer& m,
    const std::vector<encoding::PuzzleEncoding>& encodings,
    const puzzles::StandardizationParams& sp) {
  if (encodings.empty()) throw DataError("evaluate: empty dataset");
  std::vector<double> raw(encodings.size(), 0.0);
  parallel_chunks(encodings.size(),
                  [&](std::size_t, std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i) {
                      raw[i] = m.predict(encodings[i]);
                    }
                  });
  std::vector<Prediction> preds(encodings.size());
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    preds[i].puzzle_id = "#" + std::to_string(i);
    preds[i].predicted_rating = puzzles::unstandardize(raw[i], sp);
    preds[i].true_rating = puzzles::unstandardize(encodings[i].target.mu, sp);
    preds[i].rating_deviation = encodings[i].target.phi * sp.std;
    preds[i].solver_move_count = encodings[i].count;
  }
  return report_from_predictions(preds);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["mae"] = r.mae;
  j["maz"] = r.maz;
  j["acc_within_1"] = r.acc_within.at(1);
  j["acc_within_2"] = r.acc_within.at(2);
  j["acc_within_3"] = r.acc_within.at(3);
  nlohmann::json buckets = nlohmann::json::object();
  for (const auto& [moves, b] : r.mae_by_moves) {
    buckets[std::to_string(moves)] = {{"mae", b.mae}, {"count", b.count}};
  }
  j["mae_by_moves"] = buckets;
  j["n"] = r.n;
  j["encode_failures"] = r.encode_failures;
  return j;
}

/// Plot-ready rows: moves,mae,count.
inline std::string to_length_csv(const MetricsReport& r) {
  std::string out = "moves,mae,count\n";
  char buf[96];
  for (const auto& [moves, b] : r.mae_by_moves) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%zu\n", moves, b.mae, b.count);
    out += buf;
  }
  return out;
}

}  // namespace glick::metrics
