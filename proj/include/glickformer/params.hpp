#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "glickformer/rng.hpp"
#include "glickformer/tensor.hpp"

namespace glick::nn {

struct Parameter {
  std::string name;
  std::size_t index = 0;  // position in the owning store
  Tensor value;
  Tensor grad;
};

enum class Init {
  zeros,
  ones,            // layer-norm gains
  glorot_uniform,  // weight matrices
};

inline void init_tensor(Tensor& t, Init scheme, Rng& rng) {
  switch (scheme) {
    case Init::zeros:
      t.fill(0.0);
      break;
    case Init::ones:
      t.fill(1.0);
      break;
    case Init::glorot_uniform: {
      if (t.shape.size() != 2) {
        throw ShapeError("glorot init requires a matrix, got " +
                         Tensor::shape_str(t.shape));
      }
      double fan_in = static_cast<double>(t.shape[0]);
      double fan_out = static_cast<double>(t.shape[1]);
      double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& x : t.v) x = rng.next_uniform(-bound, bound);
      break;
    }
  }
}

/// Owns every learnable tensor of one model. Creation order is the canonical
/// parameter order used by the optimizer and the checkpoint format.
class ParameterStore {
 public:
  Parameter* create(std::string name, std::vector<std::size_t> shape,
                    Init scheme, Rng& rng) {
    for (const auto& p : params_) {
      if (p->name == name) {
        throw DataError("parameter name not unique: " + name);
      }
    }
    auto p = std::make_unique<Parameter>();
    p->name = std::move(name);
    p->index = params_.size();
    p->value = Tensor(shape);
    p->grad = Tensor(std::move(shape));
    init_tensor(p->value, scheme, rng);
    params_.push_back(std::move(p));
    return params_.back().get();
  }

  std::size_t size() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }

  Parameter* find(std::string_view name) {
    for (auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : params_) p->grad.fill(0.0);
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Per-parameter gradient accumulation buffer, indexed like the store.
/// Slots stay empty until something is accumulated into them.
using GradVec = std::vector<Tensor>;

inline GradVec make_grad_vec(const ParameterStore& store) {
  return GradVec(store.size());
}

/// Adds sink contents into the stored Parameter::grad fields.
inline void flush_grads(ParameterStore& store, const GradVec& sink) {
  for (std::size_t i = 0; i < sink.size(); ++i) {
    if (!sink[i].empty()) store.at(i).grad.add(sink[i]);
  }
}

}  // namespace glick::nn
