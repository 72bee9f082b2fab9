#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "glickformer/model.hpp"
#include "glickformer/puzzles.hpp"
#include "glickformer/training.hpp"

namespace glick::config {

/// Everything a run needs: architecture, optimizer, data paths,
/// standardization and the root seed. Sourced from a flat key = value file;
/// command-line flags override file values. Unknown keys are rejected.
struct RunConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  puzzles::StandardizationParams standardization;
  std::string data;
  std::string out = "run";
  double test_fraction = 0.01;
  std::uint64_t seed = 1;

  /// Seed fan-out: the training streams derive from the root seed.
  void finalize() {
    train.seed = seed;
    model.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw DataError("config: test_fraction must be in (0,1)");
    }
    if (standardization.std <= 0.0) {
      throw DataError("config: std must be > 0");
    }
  }
};

inline void apply_key(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  auto to_u = [&](const std::string& v) -> std::size_t {
    try {
      return std::stoul(v);
    } catch (...) {
      throw DataError("config: bad integer for " + key + ": '" + v + "'");
    }
  };
  auto to_d = [&](const std::string& v) -> double {
    try {
      return std::stod(v);
    } catch (...) {
      throw DataError("config: bad number for " + key + ": '" + v + "'");
    }
  };
  if (key == "variant") {
    cfg.model.variant = model::variant_from_tag(value);
  } else if (key == "d") {
    cfg.model.d = to_u(value);
  } else if (key == "heads") {
    cfg.model.heads = to_u(value);
  } else if (key == "layers") {
    cfg.model.spatial_layers = to_u(value);
  } else if (key == "temporal_layers") {
    cfg.model.temporal_layers = to_u(value);
  } else if (key == "n_max") {
    cfg.model.n_max = to_u(value);
  } else if (key == "d_z") {
    cfg.model.d_z = to_u(value);
  } else if (key == "ffn_mult") {
    cfg.model.ffn_mult = to_u(value);
  } else if (key == "lr") {
    cfg.train.learning_rate = to_d(value);
  } else if (key == "rho") {
    cfg.train.rho = to_d(value);
  } else if (key == "batch") {
    cfg.train.batch_size = to_u(value);
  } else if (key == "steps") {
    cfg.train.total_steps = to_u(value);
  } else if (key == "cycle_base") {
    cfg.train.cycle_base = to_u(value);
  } else if (key == "mean") {
    cfg.standardization.mean = to_d(value);
  } else if (key == "std") {
    cfg.standardization.std = to_d(value);
  } else if (key == "data") {
    cfg.data = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "test_fraction") {
    cfg.test_fraction = to_d(value);
  } else if (key == "seed") {
    cfg.seed = to_u(value);
  } else {
    throw DataError("config: unknown key '" + key + "'");
  }
}

/// Parses `key = value` lines; '#' starts a comment, blank lines ignored.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config: line " + std::to_string(lineno) +
                      ": expected key = value");
    }
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

/// Flat echo of the effective configuration (run manifest).
inline std::string serialize(const RunConfig& cfg) {
  std::ostringstream out;
  out << "variant = " << model::variant_tag(cfg.model.variant) << "\n"
      << "d = " << cfg.model.d << "\n"
      << "heads = " << cfg.model.heads << "\n"
      << "layers = " << cfg.model.spatial_layers << "\n"
      << "temporal_layers = " << cfg.model.temporal_layers << "\n"
      << "n_max = " << cfg.model.n_max << "\n"
      << "d_z = " << cfg.model.d_z << "\n"
      << "ffn_mult = " << cfg.model.ffn_mult << "\n"
      << "lr = " << cfg.train.learning_rate << "\n"
      << "rho = " << cfg.train.rho << "\n"
      << "batch = " << cfg.train.batch_size << "\n"
      << "steps = " << cfg.train.total_steps << "\n"
      << "cycle_base = " << cfg.train.cycle_base << "\n"
      << "mean = " << cfg.standardization.mean << "\n"
      << "std = " << cfg.standardization.std << "\n"
      << "data = " << cfg.data << "\n"
      << "out = " << cfg.out << "\n"
      << "test_fraction = " << cfg.test_fraction << "\n"
      << "seed = " << cfg.seed << "\n";
  return out.str();
}

}  // namespace glick::config
