#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glickformer/checkpoint.hpp"
#include "glickformer/encoding.hpp"
#include "glickformer/gradcheck_suites.hpp"
#include "glickformer/metrics.hpp"
#include "glickformer/model.hpp"
#include "glickformer/puzzles.hpp"
#include "glickformer/runconfig.hpp"
#include "glickformer/training.hpp"

namespace {

using namespace glick;

bool is_shard_path(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".glkf") return true;
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {0};
  in.read(magic, 4);
  return in && std::string_view(magic, 4) == "GLKF";
}

model::GlickFormer load_model(const std::string& checkpoint,
                              model::ModelMeta& meta) {
  meta = model::load_model_meta(checkpoint + ".meta");
  model::GlickFormer m(meta.config, 0);
  nn::load_checkpoint(m.params(), checkpoint);
  return m;
}

std::vector<chess::Move> parse_move_list(const std::string& text) {
  std::vector<chess::Move> moves;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) moves.push_back(chess::parse_uci(tok));
  return moves;
}

encoding::PuzzleEncoding encode_line(const std::string& fen,
                                     const std::string& moves_text,
                                     std::size_t n_max) {
  auto moves = parse_move_list(moves_text);
  encoding::PuzzleEncoding enc;
  auto boards = encoding::encode_boards(fen, moves, n_max, "cli");
  enc.count = boards.size();
  enc.boards = std::move(boards);
  enc.boards.resize(n_max);
  enc.mask.assign(n_max, 0);
  for (std::size_t i = 0; i < enc.count; ++i) enc.mask[i] = 1;
  return enc;
}

int cmd_ingest(const std::string& csv, const std::string& out,
               std::size_t n_max, double mean, double std_dev) {
  puzzles::StandardizationParams sp{mean, std_dev};
  auto loaded = puzzles::load_puzzles(csv);
  std::vector<encoding::PuzzleEncoding> encodings;
  encodings.reserve(loaded.records.size());
  std::size_t encode_failures = 0;
  for (const auto& rec : loaded.records) {
    try {
      encodings.push_back(encoding::encode_puzzle(rec, n_max, sp));
    } catch (const DataError& e) {
      std::fprintf(stderr, "ingest: %s\n", e.what());
      ++encode_failures;
    }
  }
  encoding::write_shard(encodings, n_max, out);
  std::fprintf(stderr, "ingest: encoded=%zu encode_failures=%zu -> %s\n",
               encodings.size(), encode_failures, out.c_str());
  std::printf("{\"rows\": %zu, \"kept\": %zu, \"skipped\": %zu, "
              "\"encoded\": %zu, \"encode_failures\": %zu}\n",
              loaded.total_rows, loaded.records.size(), loaded.skipped,
              encodings.size(), encode_failures);
  return 0;
}

int cmd_train(const config::RunConfig& cfg) {
  if (cfg.data.empty()) throw DataError("train: no data path configured");

  std::vector<encoding::PuzzleEncoding> train_set;
  if (is_shard_path(cfg.data)) {
    auto shard = encoding::read_shard(cfg.data);
    if (shard.n_max != cfg.model.n_max) {
      throw DataError("train: shard n_max " + std::to_string(shard.n_max) +
                      " does not match config n_max " +
                      std::to_string(cfg.model.n_max));
    }
    train_set = std::move(shard.encodings);
  } else {
    auto loaded = puzzles::load_puzzles(cfg.data);
    if (loaded.records.empty()) throw DataError("train: no usable records");
    auto parts = puzzles::split(loaded.records, cfg.seed, cfg.test_fraction);
    std::fprintf(stderr, "train: split train=%zu test=%zu\n",
                 parts.train.size(), parts.test.size());
    for (const auto& rec : parts.train) {
      try {
        train_set.push_back(
            encoding::encode_puzzle(rec, cfg.model.n_max, cfg.standardization));
      } catch (const DataError& e) {
        std::fprintf(stderr, "train: skipping %s\n", e.what());
      }
    }
  }
  if (train_set.empty()) throw DataError("train: nothing to train on");

  model::GlickFormer m(cfg.model, cfg.seed);
  model::ModelMeta meta{cfg.model, cfg.standardization};
  train::TrainOptions opt;
  opt.out_dir = cfg.out;
  opt.run_name = "model_" + model::variant_tag(cfg.model.variant);
  opt.meta = &meta;

  std::filesystem::create_directories(cfg.out);
  {
    std::ofstream manifest(cfg.out + "/manifest.txt", std::ios::trunc);
    manifest << config::serialize(cfg);
    manifest << "train_puzzles = " << train_set.size() << "\n";
  }

  auto result = train::train(m, train_set, cfg.train, opt);
  const auto& last = result.trace.back();
  std::printf("{\"checkpoint\": \"%s\", \"steps\": %zu, \"final_loss\": %.6f, "
              "\"puzzles\": %zu}\n",
              result.final_checkpoint.c_str(), cfg.train.total_steps,
              last.loss, train_set.size());
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data,
             const std::string& out_dir) {
  model::ModelMeta meta;
  model::GlickFormer m = load_model(checkpoint, meta);

  metrics::MetricsReport report;
  if (is_shard_path(data)) {
    auto shard = encoding::read_shard(data);
    if (shard.n_max != meta.config.n_max) {
      throw DataError("eval: shard n_max does not match checkpoint");
    }
    report = metrics::evaluate_encoded(m, shard.encodings, meta.standardization);
  } else {
    auto loaded = puzzles::load_puzzles(data);
    report = metrics::evaluate(m, loaded.records, meta.standardization);
  }

  std::cout << metrics::to_json(report).dump(2) << "\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream json_out(out_dir + "/metrics.json", std::ios::trunc);
    json_out << metrics::to_json(report).dump(2) << "\n";
    std::ofstream csv_out(out_dir + "/mae_by_moves.csv", std::ios::trunc);
    csv_out << metrics::to_length_csv(report);
  }
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& fen,
                const std::string& moves) {
  model::ModelMeta meta;
  model::GlickFormer m = load_model(checkpoint, meta);
  auto enc = encode_line(fen, moves, meta.config.n_max);
  double rating = puzzles::unstandardize(m.predict(enc), meta.standardization);
  if (!std::isfinite(rating)) throw NumericError("predict: non-finite rating");
  std::printf("%.1f\n", rating);
  return 0;
}

int cmd_encode_inspect(const std::string& fen, const std::string& moves,
                       std::size_t n_max) {
  auto enc = encode_line(fen, moves, n_max);
  std::printf("fen: %s\n", fen.c_str());
  std::printf("moves: %s\n", moves.c_str());
  chess::BoardState after_first =
      chess::apply_move(chess::parse_fen(fen), parse_move_list(moves)[0]);
  bool mirrored = after_first.side_to_move == chess::Color::black;
  std::printf("solver: %s%s\n", mirrored ? "black" : "white",
              mirrored ? " (mirrored to mover perspective)" : "");
  std::string mask;
  for (auto b : enc.mask) mask += b ? '1' : '0';
  std::printf("boards: %zu of n_max %zu, mask %s\n", enc.count, n_max,
              mask.c_str());

  static const char* channel_names[encoding::kChannels] = {
      "mover king",  "mover queen",  "mover rook",  "mover bishop",
      "mover knight", "mover pawn",  "opp king",    "opp queen",
      "opp rook",    "opp bishop",   "opp knight",  "opp pawn",
      "prev from",   "prev to",      "next from",   "next to"};

  for (std::size_t n = 0; n < enc.count; ++n) {
    const auto& b = enc.boards[n];
    std::printf("\nboard %zu:\n", n + 1);
    for (int rank = 7; rank >= 0; --rank) {
      std::string row;
      for (int file = 0; file < 8; ++file) {
        int sq = rank * 8 + file;
        char c = '.';
        static const char* mover_chars = "KQRBNP";
        for (std::size_t ch = 0; ch < 12; ++ch) {
          if (b.get(ch, sq)) {
            c = ch < 6 ? mover_chars[ch]
                       : static_cast<char>(std::tolower(mover_chars[ch - 6]));
          }
        }
        row += c;
        row += ' ';
      }
      std::printf("  %d  %s\n", rank + 1, row.c_str());
    }
    std::printf("     a b c d e f g h\n");
    auto square_name = [](std::uint64_t mask_bits) {
      int sq = std::countr_zero(mask_bits);
      return std::string{static_cast<char>('a' + sq % 8),
                         static_cast<char>('1' + sq / 8)};
    };
    std::printf("  prev %s -> %s, next %s -> %s\n",
                square_name(b.ch[encoding::kPrevFrom]).c_str(),
                square_name(b.ch[encoding::kPrevTo]).c_str(),
                square_name(b.ch[encoding::kNextFrom]).c_str(),
                square_name(b.ch[encoding::kNextTo]).c_str());
    std::printf("  channel bits:");
    for (std::size_t c = 0; c < encoding::kChannels; ++c) {
      std::printf(" %s=%d", channel_names[c], b.popcount(c));
    }
    std::printf("\n");
  }
  return 0;
}

int cmd_gradcheck(const std::string& module, std::uint64_t seed) {
  auto suites = checks::run_module(module, seed);
  bool all_pass = true;
  for (const auto& s : suites) {
    bool pass = s.report.passed();
    all_pass = all_pass && pass;
    std::printf("%-28s max_rel_err=%.3e tol=%.0e params=%zu %s\n",
                s.name.c_str(), s.report.max_rel_err, s.report.tolerance,
                s.report.params.size(), pass ? "PASS" : "FAIL");
    if (!pass) {
      for (const auto& pc : s.report.params) {
        if (pc.max_rel_err > s.report.tolerance) {
          std::printf("    %-32s %.3e\n", pc.name.c_str(), pc.max_rel_err);
        }
      }
    }
  }
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glickformer: transformer-based chess puzzle difficulty "
               "prediction"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Encode a puzzle CSV into a "
                                              "binary shard");
  std::string ingest_csv, ingest_out = "puzzles.glkf";
  std::size_t ingest_nmax = 5;
  double ingest_mean = 1516.0, ingest_std = 543.0;
  ingest->add_option("csv", ingest_csv, "Lichess puzzle CSV")->required();
  ingest->add_option("--out", ingest_out, "Output shard path");
  ingest->add_option("--n-max", ingest_nmax, "Boards per puzzle");
  ingest->add_option("--mean", ingest_mean, "Rating mean");
  ingest->add_option("--std", ingest_std, "Rating standard deviation");

  // train
  auto* tr = app.add_subcommand("train", "Train a model variant");
  std::string tr_config, tr_variant, tr_data, tr_out;
  std::vector<std::string> tr_sets;
  std::uint64_t tr_seed = 0;
  bool tr_seed_set = false;
  tr->add_option("--config", tr_config, "Run config file (key = value)");
  tr->add_option("--variant", tr_variant, "fe|fsa|baseline");
  tr->add_option("--data", tr_data, "Puzzle CSV or shard");
  tr->add_option("--out", tr_out, "Output directory");
  tr->add_option("--seed", tr_seed, "Root seed")
      ->each([&](const std::string&) { tr_seed_set = true; });
  tr->add_option("--set", tr_sets, "Override any config key, key=value")
      ->expected(-1);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_ckpt, ev_data, ev_out;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint (.glkw)")->required();
  ev->add_option("--data", ev_data, "Puzzle CSV or shard")->required();
  ev->add_option("--out", ev_out, "Directory for metrics.json and CSV");

  // predict
  auto* pr = app.add_subcommand("predict", "Predict one puzzle's rating");
  std::string pr_ckpt, pr_fen, pr_moves;
  pr->add_option("--checkpoint", pr_ckpt, "Checkpoint (.glkw)")->required();
  pr->add_option("--fen", pr_fen, "Starting position FEN")->required();
  pr->add_option("--moves", pr_moves, "Space-separated UCI solution line")
      ->required();

  // encode-inspect
  auto* insp = app.add_subcommand("encode-inspect",
                                  "Dump the board-tensor encoding");
  std::string insp_fen, insp_moves;
  std::size_t insp_nmax = 5;
  insp->add_option("--fen", insp_fen, "Starting position FEN")->required();
  insp->add_option("--moves", insp_moves, "Space-separated UCI line")
      ->required();
  insp->add_option("--n-max", insp_nmax, "Boards per puzzle");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck",
                                "Finite-difference gradient verification");
  std::string gc_module = "all";
  std::uint64_t gc_seed = 7;
  gc->add_option("--module", gc_module, "all|smolgen|spatial|temporal|head");
  gc->add_option("--seed", gc_seed, "Check seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      return cmd_ingest(ingest_csv, ingest_out, ingest_nmax, ingest_mean,
                        ingest_std);
    }
    if (*tr) {
      config::RunConfig cfg;
      if (!tr_config.empty()) cfg = config::load_run_config(tr_config);
      if (!tr_variant.empty()) config::apply_key(cfg, "variant", tr_variant);
      if (!tr_data.empty()) config::apply_key(cfg, "data", tr_data);
      if (!tr_out.empty()) config::apply_key(cfg, "out", tr_out);
      if (tr_seed_set) cfg.seed = tr_seed;
      for (const auto& kv : tr_sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
          throw DataError("train: --set expects key=value, got '" + kv + "'");
        }
        config::apply_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      cfg.finalize();
      return cmd_train(cfg);
    }
    if (*ev) return cmd_eval(ev_ckpt, ev_data, ev_out);
    if (*pr) return cmd_predict(pr_ckpt, pr_fen, pr_moves);
    if (*insp) return cmd_encode_inspect(insp_fen, insp_moves, insp_nmax);
    if (*gc) return cmd_gradcheck(gc_module, gc_seed);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
