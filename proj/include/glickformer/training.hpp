#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "glickformer/checkpoint.hpp"
#include "glickformer/model.hpp"
#include "glickformer/parallel.hpp"
#include "glickformer/rng.hpp"

namespace glick::train {

struct TrainConfig {
  double learning_rate = 1e-6;
  double rho = 0.99;
  std::size_t batch_size = 64;  // 4096 at full scale; 64 is the desk default
  std::size_t total_steps = 28000;
  std::size_t cycle_base = 1000;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Stochastic targets
// ---------------------------------------------------------------------------

/// Draws y ~ N(mu, phi^2) clamped to [mu - 3 phi, mu + 3 phi]. phi = 0
/// returns exactly mu.
inline double sample_target(double mu, double phi, Rng& rng) {
  if (phi < 0.0) throw DataError("sample_target: phi must be >= 0");
  double y = mu + phi * rng.next_normal();
  return std::clamp(y, mu - 3.0 * phi, mu + 3.0 * phi);
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

struct MseResult {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dpred_i = 2 (pred_i - target_i) / M
};

inline MseResult mse_loss(std::span<const double> preds,
                          std::span<const double> targets) {
  if (preds.size() != targets.size() || preds.empty()) {
    throw DataError("mse_loss: need equal, non-empty prediction/target lists");
  }
  const double m = static_cast<double>(preds.size());
  MseResult r;
  r.grad.resize(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double diff = preds[i] - targets[i];
    r.loss += diff * diff / m;
    r.grad[i] = 2.0 * diff / m;
  }
  return r;
}

// ---------------------------------------------------------------------------
// RMSprop with cyclical state restarts
// ---------------------------------------------------------------------------

/// Restart steps: the k-th cycle is cycle_base*k steps long; cycles run until
/// total_steps is exhausted, and the final (possibly partial) boundary is
/// total_steps itself.
inline std::vector<std::size_t> cycle_boundaries(std::size_t total_steps,
                                                 std::size_t cycle_base) {
  if (total_steps == 0 || cycle_base == 0) {
    throw DataError("cycle_boundaries: inputs must be positive");
  }
  std::vector<std::size_t> out;
  std::size_t acc = 0;
  for (std::size_t k = 1;; ++k) {
    acc += cycle_base * k;
    if (acc >= total_steps) break;
    out.push_back(acc);
  }
  out.push_back(total_steps);
  return out;
}

/// Plain accumulator form: acc <- rho acc + (1-rho) g^2;
/// p <- p - lr g / (sqrt(acc) + eps). No momentum, no centering.
class RmsProp {
 public:
  RmsProp(const nn::ParameterStore& store, double learning_rate, double rho,
          double eps = 1e-8)
      : lr_(learning_rate), rho_(rho), eps_(eps) {
    if (!(rho > 0.0 && rho < 1.0)) throw DataError("rmsprop: rho must be in (0,1)");
    if (learning_rate < 0.0) {
      throw DataError("rmsprop: learning rate must be >= 0");
    }
    for (std::size_t i = 0; i < store.size(); ++i) {
      acc_.push_back(nn::Tensor(store.at(i).value.shape));
    }
  }

  void step(nn::ParameterStore& store) {
    for (std::size_t i = 0; i < store.size(); ++i) {
      nn::Parameter& p = store.at(i);
      nn::Tensor& a = acc_[i];
      for (std::size_t e = 0; e < p.value.size(); ++e) {
        const double g = p.grad.v[e];
        if (!std::isfinite(g)) {
          throw NumericError("rmsprop: non-finite gradient in parameter " +
                             p.name);
        }
        a.v[e] = rho_ * a.v[e] + (1.0 - rho_) * g * g;
        p.value.v[e] -= lr_ * g / (std::sqrt(a.v[e]) + eps_);
      }
    }
    ++steps_;
  }

  /// Cycle restart: zero every accumulator.
  void reset() {
    for (auto& a : acc_) a.fill(0.0);
  }

  const std::vector<nn::Tensor>& accumulators() const { return acc_; }
  std::size_t steps() const { return steps_; }

 private:
  double lr_, rho_, eps_;
  std::vector<nn::Tensor> acc_;
  std::size_t steps_ = 0;
};

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TracePoint {
  std::size_t step = 0;
  double loss = 0.0;
  std::size_t cycle = 0;
};

struct TrainOptions {
  // When set, checkpoints, the loss trace and config sidecars land here.
  std::string out_dir;
  std::string run_name = "model";
  // Written next to each checkpoint when provided.
  const model::ModelMeta* meta = nullptr;
  // Called after every optimizer step (post restart handling).
  std::function<void(std::size_t step, const RmsProp&)> observer;
};

struct TrainResult {
  std::vector<TracePoint> trace;
  std::vector<std::size_t> boundaries;
  std::string final_checkpoint;  // empty when out_dir unset
};

namespace detail {

inline void write_trace_csv(const std::vector<TracePoint>& trace,
                            const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("train: cannot write trace " + path);
  out << "step,loss,cycle\n";
  char buf[64];
  for (const auto& t : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", t.loss);
    out << t.step << ',' << buf << ',' << t.cycle << "\n";
  }
}

inline std::size_t cycle_of(std::size_t step,
                            const std::vector<std::size_t>& boundaries) {
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    if (step <= boundaries[k]) return k + 1;
  }
  return boundaries.size();
}

}  // namespace detail

/// One SGD-style loop: per step, a batch is drawn with replacement, every
/// target is freshly sampled from its N(mu, phi^2) (clipped), and RMSprop
/// applies the averaged-MSE gradients. Optimizer accumulators restart at
/// each cycle boundary. Batch items run on worker threads with per-slot
/// gradient buffers reduced in slot order, so a run is reproducible for a
/// fixed seed and GLKF_THREADS.
inline TrainResult train(model::GlickFormer& m,
                         const std::vector<encoding::PuzzleEncoding>& data,
                         const TrainConfig& cfg, const TrainOptions& opt = {}) {
  if (data.empty()) throw DataError("train: empty dataset");
  if (cfg.batch_size == 0) throw DataError("train: batch_size must be > 0");

  Rng batch_rng = Rng(cfg.seed).stream("batch");
  Rng target_rng = Rng(cfg.seed).stream("target-sampling");

  TrainResult result;
  result.boundaries = cycle_boundaries(cfg.total_steps, cfg.cycle_base);
  RmsProp optimizer(m.params(), cfg.learning_rate, cfg.rho);

  const std::size_t n_slots =
      std::min<std::size_t>(thread_budget(), cfg.batch_size);
  std::vector<nn::GradVec> slot_sinks(n_slots);
  for (auto& s : slot_sinks) s = nn::make_grad_vec(m.params());

  std::vector<std::size_t> batch(cfg.batch_size);
  std::vector<double> targets(cfg.batch_size);
  std::vector<double> preds(cfg.batch_size);

  std::size_t next_boundary = 0;
  const bool writing = !opt.out_dir.empty();
  if (writing) std::filesystem::create_directories(opt.out_dir);

  auto save = [&](const std::string& stem) {
    std::string path = opt.out_dir + "/" + stem + ".glkw";
    nn::save_checkpoint(m.params(), path);
    if (opt.meta) model::save_model_meta(*opt.meta, path + ".meta");
    return path;
  };

  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      batch[b] = static_cast<std::size_t>(batch_rng.next_below(data.size()));
      const auto& t = data[batch[b]].target;
      targets[b] = sample_target(t.mu, t.phi, target_rng);
    }

    m.params().zero_grads();
    const double inv_m = 1.0 / static_cast<double>(cfg.batch_size);
    parallel_chunks(cfg.batch_size, [&](std::size_t slot, std::size_t lo,
                                        std::size_t hi) {
      nn::GradVec& sink = slot_sinks[slot];
      for (auto& t : sink) {
        if (!t.empty()) t.fill(0.0);
      }
      for (std::size_t b = lo; b < hi; ++b) {
        nn::Graph g;
        nn::Node* y = m.build(g, data[batch[b]]);
        preds[b] = y->val().v[0];
        g.backward(y, 2.0 * (preds[b] - targets[b]) * inv_m, sink);
      }
    });
    for (std::size_t s = 0; s < n_slots; ++s) {
      nn::flush_grads(m.params(), slot_sinks[s]);
    }

    double loss = 0.0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const double diff = preds[b] - targets[b];
      loss += diff * diff * inv_m;
    }
    if (!std::isfinite(loss)) {
      throw NumericError("train: non-finite loss at step " +
                         std::to_string(step));
    }

    optimizer.step(m.params());

    bool at_boundary = next_boundary < result.boundaries.size() &&
                       step == result.boundaries[next_boundary];
    if (at_boundary) {
      if (writing) save(opt.run_name + "_step" + std::to_string(step));
      optimizer.reset();
      ++next_boundary;
    }

    if (step % 10 == 0 || step == cfg.total_steps || at_boundary) {
      result.trace.push_back(
          {step, loss, detail::cycle_of(step, result.boundaries)});
    }
    if (opt.observer) opt.observer(step, optimizer);
  }

  if (writing) {
    result.final_checkpoint = save(opt.run_name);
    detail::write_trace_csv(result.trace,
                            opt.out_dir + "/" + opt.run_name + "_trace.csv");
  }
  return result;
}

}  // namespace glick::train
