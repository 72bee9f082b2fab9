#include <catch_amalgamated.hpp>

#include "glickformer/gradcheck_suites.hpp"
#include "glickformer/metrics.hpp"
#include "support/gamegen.hpp"

using namespace glick;
using namespace glick::metrics;

namespace {

std::vector<Prediction> synthetic_predictions(std::size_t n,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Prediction> preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    preds[i].puzzle_id = "p" + std::to_string(i);
    preds[i].true_rating = rng.next_uniform(600.0, 3000.0);
    preds[i].predicted_rating =
        preds[i].true_rating + 250.0 * rng.next_normal();
    preds[i].rating_deviation = rng.next_uniform(75.0, 260.0);
    preds[i].solver_move_count = 1 + rng.next_below(7);
  }
  return preds;
}

std::vector<puzzles::PuzzleRecord> corpus_records(std::size_t count,
                                                  std::uint64_t seed) {
  gamegen::CorpusOptions opt;
  opt.count = count;
  opt.seed = seed;
  opt.min_moves = 2;
  opt.max_moves = 6;
  auto corpus = gamegen::make_corpus(opt);
  std::vector<puzzles::PuzzleRecord> records;
  for (const auto& p : corpus) {
    puzzles::PuzzleRecord r;
    r.id = p.id;
    r.fen = p.fen;
    for (const auto& m : p.moves) r.moves.push_back(chess::parse_uci(m));
    r.rating = p.rating;
    r.rating_deviation = p.rating_deviation;
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

TEST_CASE("mae on hand-computed cases") {
  std::vector<Prediction> perfect(3);
  for (auto& p : perfect) {
    p.true_rating = 1500;
    p.predicted_rating = 1500;
    p.rating_deviation = 80;
    p.solver_move_count = 1;
  }
  CHECK(mae(perfect) == 0.0);

  std::vector<Prediction> two(2);
  two[0] = {"a", 1600.0, 1500.0, 80.0, 1};
  two[1] = {"b", 1600.0, 1700.0, 80.0, 1};
  CHECK(mae(two) == Catch::Approx(100.0));
  CHECK_THROWS_AS(mae({}), DataError);
}

TEST_CASE("maz normalizes by each puzzle's deviation") {
  std::vector<Prediction> one(1);
  one[0] = {"a", 1600.0, 1500.0, 80.0, 1};
  CHECK(maz(one) == Catch::Approx(1.25));

  one[0].rating_deviation = 0.0;
  CHECK_THROWS_AS(maz(one), DataError);
  CHECK_THROWS_AS(maz({}), DataError);
}

TEST_CASE("maz equals mae over rd when deviations are equal") {
  auto preds = synthetic_predictions(500, 7);
  for (auto& p : preds) p.rating_deviation = 120.0;
  CHECK(maz(preds) == Catch::Approx(mae(preds) / 120.0).epsilon(1e-12));
}

TEST_CASE("accuracy_within counts the boundary as inside") {
  std::vector<Prediction> preds(1);
  preds[0] = {"a", 1600.0, 1500.0, 80.0, 1};  // |error| = 100, RD = 80
  CHECK(accuracy_within(preds, 1) == 0.0);
  CHECK(accuracy_within(preds, 2) == 100.0);
  CHECK(accuracy_within(preds, 3) == 100.0);

  preds[0].predicted_rating = 1500.0 + 2 * 80.0;  // exactly 2 RD
  CHECK(accuracy_within(preds, 2) == 100.0);

  CHECK_THROWS_AS(accuracy_within(preds, 0), DataError);
  CHECK_THROWS_AS(accuracy_within({}, 1), DataError);
}

TEST_CASE("accuracy is monotone in k on random sets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto preds = synthetic_predictions(400, seed);
    double a1 = accuracy_within(preds, 1);
    double a2 = accuracy_within(preds, 2);
    double a3 = accuracy_within(preds, 3);
    REQUIRE(a1 <= a2);
    REQUIRE(a2 <= a3);
  }
}

TEST_CASE("mae_by_solution_length buckets partition the set") {
  std::vector<Prediction> preds(3);
  preds[0] = {"a", 1550.0, 1500.0, 80.0, 1};  // error 50
  preds[1] = {"b", 1450.0, 1500.0, 80.0, 1};  // error 50
  preds[2] = {"c", 1350.0, 1500.0, 80.0, 2};  // error 150
  auto buckets = mae_by_solution_length(preds);
  REQUIRE(buckets.size() == 2);
  CHECK(buckets.at(1).mae == Catch::Approx(50.0));
  CHECK(buckets.at(1).count == 2);
  CHECK(buckets.at(2).mae == Catch::Approx(150.0));
  CHECK(buckets.at(2).count == 1);

  auto big = synthetic_predictions(1000, 3);
  std::size_t total = 0;
  for (const auto& [_, b] : mae_by_solution_length(big)) total += b.count;
  CHECK(total == big.size());

  // A single bucket equals the global MAE.
  for (auto& p : big) p.solver_move_count = 2;
  auto single = mae_by_solution_length(big);
  REQUIRE(single.size() == 1);
  CHECK(single.at(2).mae == Catch::Approx(mae(big)));
}

TEST_CASE("every metric matches a brute-force recomputation") {
  auto preds = synthetic_predictions(10000, 11);

  double sum_abs = 0.0, sum_z = 0.0;
  double hits[4] = {0, 0, 0, 0};
  std::map<std::size_t, std::pair<double, std::size_t>> buckets;
  for (const auto& p : preds) {
    double err = p.true_rating - p.predicted_rating;
    if (err < 0) err = -err;
    sum_abs += err;
    sum_z += err / p.rating_deviation;
    for (int k = 1; k <= 3; ++k) {
      if (err <= k * p.rating_deviation) hits[k] += 1;
    }
    buckets[p.solver_move_count].first += err;
    buckets[p.solver_move_count].second += 1;
  }
  const double n = static_cast<double>(preds.size());

  CHECK(std::abs(mae(preds) - sum_abs / n) <= 1e-9);
  CHECK(std::abs(maz(preds) - sum_z / n) <= 1e-9);
  for (int k = 1; k <= 3; ++k) {
    CHECK(std::abs(accuracy_within(preds, k) - 100.0 * hits[k] / n) <= 1e-9);
  }
  auto got = mae_by_solution_length(preds);
  REQUIRE(got.size() == buckets.size());
  for (const auto& [moves, acc] : buckets) {
    CHECK(std::abs(got.at(moves).mae - acc.first / acc.second) <= 1e-9);
    CHECK(got.at(moves).count == acc.second);
  }
}

TEST_CASE("report serialization carries all fields") {
  auto preds = synthetic_predictions(50, 13);
  auto report = report_from_predictions(preds, 2);
  auto j = to_json(report);
  CHECK(j["mae"].get<double>() == Catch::Approx(report.mae));
  CHECK(j["maz"].get<double>() == Catch::Approx(report.maz));
  CHECK(j["acc_within_1"].get<double>() == Catch::Approx(report.acc_within[1]));
  CHECK(j["acc_within_3"].get<double>() == Catch::Approx(report.acc_within[3]));
  CHECK(j["n"].get<std::size_t>() == 50);
  CHECK(j["encode_failures"].get<std::size_t>() == 2);
  CHECK(j["mae_by_moves"].is_object());

  auto csv = to_length_csv(report);
  CHECK(csv.rfind("moves,mae,count\n", 0) == 0);
}

TEST_CASE("a constant-zero model scores the mean-offset oracle") {
  model::ModelConfig cfg = checks::reduced_config(
      model::Variant::baseline_stacked);
  model::GlickFormer m(cfg, 17);
  // Zero the output layer: every prediction becomes exactly 0 standardized.
  m.params().find("head.fc2.w")->value.fill(0.0);
  m.params().find("head.fc2.b")->value.fill(0.0);

  auto records = corpus_records(120, 19);
  puzzles::StandardizationParams sp;
  auto report = evaluate(m, records, sp);

  double expect = 0.0, expect_z = 0.0;
  for (const auto& r : records) {
    expect += std::abs(r.rating - sp.mean);
    expect_z += std::abs(r.rating - sp.mean) / r.rating_deviation;
  }
  expect /= records.size();
  expect_z /= records.size();
  CHECK(report.n == records.size());
  CHECK(report.mae == Catch::Approx(expect).epsilon(1e-9));
  CHECK(report.maz == Catch::Approx(expect_z).epsilon(1e-9));
}

TEST_CASE("evaluate excludes records that fail to encode") {
  model::ModelConfig cfg = checks::reduced_config(
      model::Variant::factorized_encoder);
  model::GlickFormer m(cfg, 23);
  auto records = corpus_records(20, 29);
  // Replay fails: the kings-only board has nothing on e2.
  records[4].fen = "8/8/8/8/8/8/8/K6k w - - 0 1";
  records[4].moves = {chess::parse_uci("e2e4"), chess::parse_uci("e7e5")};
  auto report = evaluate(m, records, {});
  CHECK(report.n == records.size() - 1);
  CHECK(report.encode_failures == 1);
}

TEST_CASE("evaluate rejects an empty dataset") {
  model::ModelConfig cfg = checks::reduced_config(
      model::Variant::factorized_encoder);
  model::GlickFormer m(cfg, 23);
  CHECK_THROWS_AS(evaluate(m, {}, {}), DataError);
  CHECK_THROWS_AS(evaluate_encoded(m, {}, {}), DataError);
}

TEST_CASE("evaluate from shards reconstructs ratings from targets") {
  model::ModelConfig cfg = checks::reduced_config(
      model::Variant::baseline_stacked);
  model::GlickFormer m(cfg, 31);
  m.params().find("head.fc2.w")->value.fill(0.0);
  m.params().find("head.fc2.b")->value.fill(0.0);

  auto records = corpus_records(60, 37);
  puzzles::StandardizationParams sp;
  std::vector<encoding::PuzzleEncoding> encs;
  for (const auto& r : records) {
    encs.push_back(encoding::encode_puzzle(r, cfg.n_max, sp));
  }
  auto report = evaluate_encoded(m, encs, sp);
  double expect = 0.0;
  for (const auto& r : records) expect += std::abs(r.rating - sp.mean);
  expect /= records.size();
  CHECK(report.mae == Catch::Approx(expect).epsilon(1e-9));
}
