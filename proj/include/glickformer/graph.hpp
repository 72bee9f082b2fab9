#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "glickformer/params.hpp"
#include "glickformer/tensor.hpp"

namespace glick::nn {

class Graph;

/// One value in a forward computation. Gradient buffers are allocated only
/// along paths that reach a parameter.
struct Node {
  Tensor value;
  Tensor grad;
  const Tensor* shared = nullptr;  // parameter leaves alias instead of copying
  const Parameter* param = nullptr;
  bool needs_grad = false;
  std::function<void(Node&, GradVec&)> backprop;

  const Tensor& val() const { return shared ? *shared : value; }

  void ensure_grad() {
    if (grad.empty()) grad = Tensor::zeros(val().shape);
  }

  // Accumulate into this node's gradient iff it participates in backprop.
  void add_grad_from(const Tensor& g) {
    if (!needs_grad) return;
    ensure_grad();
    grad.add(g);
  }
};

/// Forward tape. Creation order is a topological order, so backward is a
/// single reverse sweep. One graph per puzzle per pass; not thread-shared.
class Graph {
 public:
  Node* constant(Tensor v) {
    Node* n = make();
    n->value = std::move(v);
    return n;
  }

  /// Memoized per graph; aliases the parameter's value tensor.
  Node* leaf(const Parameter* p) {
    auto it = leaves_.find(p);
    if (it != leaves_.end()) return it->second;
    Node* n = make();
    n->shared = &p->value;
    n->param = p;
    n->needs_grad = true;
    n->backprop = [](Node& self, GradVec& sink) {
      Tensor& slot = sink[self.param->index];
      if (slot.empty()) slot = Tensor::zeros(self.val().shape);
      slot.add(self.grad);
    };
    leaves_[p] = n;
    return n;
  }

  // ---- primitives ------------------------------------------------------

  Node* matmul(Node* a, Node* b) {
    require_matrix(a->val(), "matmul");
    require_matrix(b->val(), "matmul");
    Node* n = make(a, b);
    n->value = Tensor({a->val().rows(), b->val().cols()});
    matmul_nn(a->val(), b->val(), n->value, false);
    n->backprop = [a, b](Node& self, GradVec&) {
      if (a->needs_grad) {
        a->ensure_grad();
        matmul_nt(self.grad, b->val(), a->grad, true);
      }
      if (b->needs_grad) {
        b->ensure_grad();
        matmul_tn(a->val(), self.grad, b->grad, true);
      }
    };
    return n;
  }

  /// a * b^T without materializing the transpose.
  Node* matmul_t(Node* a, Node* b) {
    require_matrix(a->val(), "matmul_t");
    require_matrix(b->val(), "matmul_t");
    Node* n = make(a, b);
    n->value = Tensor({a->val().rows(), b->val().rows()});
    matmul_nt(a->val(), b->val(), n->value, true);
    n->backprop = [a, b](Node& self, GradVec&) {
      if (a->needs_grad) {
        a->ensure_grad();
        matmul_nn(self.grad, b->val(), a->grad, true);
      }
      if (b->needs_grad) {
        b->ensure_grad();
        matmul_tn(self.grad, a->val(), b->grad, true);
      }
    };
    return n;
  }

  Node* add(Node* a, Node* b) {
    if (a->val().shape != b->val().shape) {
      throw ShapeError("add: " + Tensor::shape_str(a->val().shape) + " vs " +
                       Tensor::shape_str(b->val().shape));
    }
    Node* n = make(a, b);
    n->value = a->val();
    n->value.add(b->val());
    n->backprop = [a, b](Node& self, GradVec&) {
      a->add_grad_from(self.grad);
      b->add_grad_from(self.grad);
    };
    return n;
  }

  /// x [n,k] plus a broadcast row vector b of k entries.
  Node* add_rowvec(Node* x, Node* bias) {
    const std::size_t k = x->val().cols();
    if (bias->val().size() != k) {
      throw ShapeError("add_rowvec: bias size " +
                       Tensor::shape_str(bias->val().shape) + " vs row width " +
                       std::to_string(k));
    }
    Node* n = make(x, bias);
    n->value = x->val();
    for (std::size_t i = 0; i < n->value.rows(); ++i) {
      double* row = n->value.row(i);
      for (std::size_t j = 0; j < k; ++j) row[j] += bias->val().v[j];
    }
    n->backprop = [x, bias, k](Node& self, GradVec&) {
      x->add_grad_from(self.grad);
      if (bias->needs_grad) {
        bias->ensure_grad();
        for (std::size_t i = 0; i < self.grad.rows(); ++i) {
          const double* row = self.grad.row(i);
          for (std::size_t j = 0; j < k; ++j) bias->grad.v[j] += row[j];
        }
      }
    };
    return n;
  }

  Node* scale(Node* a, double c) {
    Node* n = make(a);
    n->value = a->val();
    for (double& x : n->value.v) x *= c;
    n->backprop = [a, c](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        a->grad.v[i] += c * self.grad.v[i];
      }
    };
    return n;
  }

  /// Element-wise x * tanh(softplus(x)). With u = 1 + e^x this is
  /// x (u^2-1)/(u^2+1), one exp per element; the backward factors
  /// tanh(softplus(x)) and sigmoid(x) are cached from the forward pass.
  Node* mish(Node* a) {
    Node* n = make(a);
    const std::size_t sz = a->val().size();
    n->value = a->val();
    auto cache = std::make_shared<Tensor>(Tensor({sz, 2}));
    for (std::size_t i = 0; i < sz; ++i) {
      const double x = n->value.v[i];
      double t, s;
      if (x > 30.0) {  // softplus saturates; e^x would overflow the square
        t = 1.0;
        s = 1.0;
      } else {
        const double ex = std::exp(x);
        const double u = 1.0 + ex;
        t = (u * u - 1.0) / (u * u + 1.0);
        s = ex / u;
      }
      cache->v[2 * i] = t;
      cache->v[2 * i + 1] = s;
      n->value.v[i] = x * t;
    }
    n->backprop = [a, cache, sz](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      const double* __restrict__ tc = cache->v.data();
      for (std::size_t i = 0; i < sz; ++i) {
        const double t = tc[2 * i], s = tc[2 * i + 1];
        const double d = t + a->val().v[i] * s * (1.0 - t * t);
        a->grad.v[i] += d * self.grad.v[i];
      }
    };
    return n;
  }

  /// Normalizes the last axis of a matrix: (x - mean)/sqrt(var + eps) * g + b.
  Node* layer_norm(Node* x, Node* gain, Node* bias, double eps = 1e-5) {
    require_matrix(x->val(), "layer_norm");
    const std::size_t rows = x->val().rows(), k = x->val().cols();
    if (gain->val().size() != k || bias->val().size() != k) {
      throw ShapeError("layer_norm: gain/bias width mismatch");
    }
    Node* n = make(x, gain, bias);
    n->value = Tensor({rows, k});
    // Cache per-row mean and inverse stddev for backward.
    auto stats = std::make_shared<Tensor>(Tensor({rows, 2}));
    for (std::size_t i = 0; i < rows; ++i) {
      const double* xr = x->val().row(i);
      double mean = 0.0;
      for (std::size_t j = 0; j < k; ++j) mean += xr[j];
      mean /= static_cast<double>(k);
      double var = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        double d = xr[j] - mean;
        var += d * d;
      }
      var /= static_cast<double>(k);
      double inv_std = 1.0 / std::sqrt(var + eps);
      stats->at(i, 0) = mean;
      stats->at(i, 1) = inv_std;
      double* yr = n->value.row(i);
      for (std::size_t j = 0; j < k; ++j) {
        yr[j] = (xr[j] - mean) * inv_std * gain->val().v[j] + bias->val().v[j];
      }
    }
    n->backprop = [x, gain, bias, stats, rows, k](Node& self, GradVec&) {
      const double kd = static_cast<double>(k);
      if (gain->needs_grad) gain->ensure_grad();
      if (bias->needs_grad) bias->ensure_grad();
      if (x->needs_grad) x->ensure_grad();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* xr = x->val().row(i);
        const double* dy = self.grad.row(i);
        const double mean = stats->at(i, 0);
        const double inv_std = stats->at(i, 1);
        if (gain->needs_grad || bias->needs_grad) {
          for (std::size_t j = 0; j < k; ++j) {
            double xhat = (xr[j] - mean) * inv_std;
            if (gain->needs_grad) gain->grad.v[j] += dy[j] * xhat;
            if (bias->needs_grad) bias->grad.v[j] += dy[j];
          }
        }
        if (!x->needs_grad) continue;
        // dxhat_j = dy_j * g_j; dx via the two reduction terms.
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          double xhat = (xr[j] - mean) * inv_std;
          double dxhat = dy[j] * gain->val().v[j];
          sum_dxhat += dxhat;
          sum_dxhat_xhat += dxhat * xhat;
        }
        double* dx = x->grad.row(i);
        for (std::size_t j = 0; j < k; ++j) {
          double xhat = (xr[j] - mean) * inv_std;
          double dxhat = dy[j] * gain->val().v[j];
          dx[j] += inv_std *
                   (dxhat - sum_dxhat / kd - xhat * sum_dxhat_xhat / kd);
        }
      }
    };
    return n;
  }

  /// Row-wise softmax. Columns where keep[j] == 0 (or entries equal to
  /// -infinity) produce exact zeros; a fully masked row is all zeros.
  Node* softmax_rows(Node* x, std::vector<std::uint8_t> keep = {}) {
    require_matrix(x->val(), "softmax");
    const std::size_t rows = x->val().rows(), m = x->val().cols();
    if (!keep.empty() && keep.size() != m) {
      throw ShapeError("softmax: mask width mismatch");
    }
    Node* n = make(x);
    n->value = Tensor({rows, m});
    const double ninf = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      const double* xr = x->val().row(i);
      double* yr = n->value.row(i);
      double mx = ninf;
      for (std::size_t j = 0; j < m; ++j) {
        if ((keep.empty() || keep[j]) && xr[j] != ninf) mx = std::max(mx, xr[j]);
      }
      if (mx == ninf) continue;  // fully masked row stays zero
      double z = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        bool live = (keep.empty() || keep[j]) && xr[j] != ninf;
        yr[j] = live ? std::exp(xr[j] - mx) : 0.0;
        z += yr[j];
      }
      for (std::size_t j = 0; j < m; ++j) yr[j] /= z;
    }
    n->backprop = [x, rows, m](Node& self, GradVec&) {
      if (!x->needs_grad) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* y = self.value.row(i);
        const double* dy = self.grad.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += dy[j] * y[j];
        double* dx = x->grad.row(i);
        for (std::size_t j = 0; j < m; ++j) dx[j] += y[j] * (dy[j] - dot);
      }
    };
    return n;
  }

  Node* concat_cols(std::span<Node* const> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const std::size_t rows = parts[0]->val().rows();
    std::size_t total = 0;
    for (Node* p : parts) {
      require_matrix(p->val(), "concat_cols");
      if (p->val().rows() != rows) throw ShapeError("concat_cols: row mismatch");
      total += p->val().cols();
    }
    Node* n = make();
    for (Node* p : parts) attach(n, p);
    n->value = Tensor({rows, total});
    std::size_t off = 0;
    for (Node* p : parts) {
      const std::size_t k = p->val().cols();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* src = p->val().row(i);
        double* dst = n->value.row(i) + off;
        for (std::size_t j = 0; j < k; ++j) dst[j] = src[j];
      }
      off += k;
    }
    std::vector<Node*> owned(parts.begin(), parts.end());
    n->backprop = [owned, rows](Node& self, GradVec&) {
      std::size_t off = 0;
      for (Node* p : owned) {
        const std::size_t k = p->val().cols();
        if (p->needs_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < rows; ++i) {
            const double* src = self.grad.row(i) + off;
            double* dst = p->grad.row(i);
            for (std::size_t j = 0; j < k; ++j) dst[j] += src[j];
          }
        }
        off += k;
      }
    };
    return n;
  }

  Node* slice_cols(Node* a, std::size_t lo, std::size_t hi) {
    require_matrix(a->val(), "slice_cols");
    if (lo >= hi || hi > a->val().cols()) throw ShapeError("slice_cols: range");
    const std::size_t rows = a->val().rows(), k = hi - lo;
    Node* n = make(a);
    n->value = Tensor({rows, k});
    for (std::size_t i = 0; i < rows; ++i) {
      const double* src = a->val().row(i) + lo;
      double* dst = n->value.row(i);
      for (std::size_t j = 0; j < k; ++j) dst[j] = src[j];
    }
    n->backprop = [a, lo, rows, k](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* src = self.grad.row(i);
        double* dst = a->grad.row(i) + lo;
        for (std::size_t j = 0; j < k; ++j) dst[j] += src[j];
      }
    };
    return n;
  }

  /// Stacks single-row matrices into one [n, k] matrix.
  Node* stack_rows(std::span<Node* const> parts) {
    if (parts.empty()) throw ShapeError("stack_rows: no inputs");
    const std::size_t k = parts[0]->val().cols();
    Node* n = make();
    n->value = Tensor({parts.size(), k});
    for (std::size_t i = 0; i < parts.size(); ++i) {
      Node* p = parts[i];
      if (p->val().rows() != 1 || p->val().cols() != k) {
        throw ShapeError("stack_rows: each part must be [1,k]");
      }
      attach(n, p);
      for (std::size_t j = 0; j < k; ++j) n->value.at(i, j) = p->val().at(0, j);
    }
    std::vector<Node*> owned(parts.begin(), parts.end());
    n->backprop = [owned, k](Node& self, GradVec&) {
      for (std::size_t i = 0; i < owned.size(); ++i) {
        if (!owned[i]->needs_grad) continue;
        owned[i]->ensure_grad();
        for (std::size_t j = 0; j < k; ++j) {
          owned[i]->grad.v[j] += self.grad.at(i, j);
        }
      }
    };
    return n;
  }

  /// Block-diagonal a * b^T: rows are split into consecutive groups of
  /// `block` rows and each group attends only within itself.
  /// a [g*block, k], b [g*block, k] -> [g*block, block].
  Node* block_matmul_t(Node* a, Node* b, std::size_t block) {
    require_matrix(a->val(), "block_matmul_t");
    const std::size_t rows = a->val().rows(), k = a->val().cols();
    if (b->val().rows() != rows || b->val().cols() != k || block == 0 ||
        rows % block != 0) {
      throw ShapeError("block_matmul_t: incompatible shapes");
    }
    const std::size_t groups = rows / block;
    Node* n = make(a, b);
    n->value = Tensor({rows, block});
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const std::size_t r0 = gi * block;
      for (std::size_t i = 0; i < block; ++i) {
        const double* __restrict__ arow = a->val().row(r0 + i);
        double* __restrict__ crow = n->value.row(r0 + i);
        for (std::size_t j = 0; j < block; ++j) {
          const double* __restrict__ brow = b->val().row(r0 + j);
          double acc = 0.0;
          for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
          crow[j] = acc;
        }
      }
    }
    n->backprop = [a, b, block, groups, k](Node& self, GradVec&) {
      if (a->needs_grad) a->ensure_grad();
      if (b->needs_grad) b->ensure_grad();
      for (std::size_t gi = 0; gi < groups; ++gi) {
        const std::size_t r0 = gi * block;
        for (std::size_t i = 0; i < block; ++i) {
          const double* __restrict__ dc = self.grad.row(r0 + i);
          for (std::size_t j = 0; j < block; ++j) {
            const double d = dc[j];
            if (d == 0.0) continue;
            if (a->needs_grad) {
              double* __restrict__ da = a->grad.row(r0 + i);
              const double* __restrict__ brow = b->val().row(r0 + j);
              for (std::size_t l = 0; l < k; ++l) da[l] += d * brow[l];
            }
            if (b->needs_grad) {
              double* __restrict__ db = b->grad.row(r0 + j);
              const double* __restrict__ arow = a->val().row(r0 + i);
              for (std::size_t l = 0; l < k; ++l) db[l] += d * arow[l];
            }
          }
        }
      }
    };
    return n;
  }

  /// Block-diagonal w * v with square per-group weight blocks.
  /// w [g*block, block], v [g*block, k] -> [g*block, k].
  Node* block_matmul(Node* w, Node* v, std::size_t block) {
    require_matrix(w->val(), "block_matmul");
    const std::size_t rows = w->val().rows(), k = v->val().cols();
    if (w->val().cols() != block || v->val().rows() != rows || block == 0 ||
        rows % block != 0) {
      throw ShapeError("block_matmul: incompatible shapes");
    }
    const std::size_t groups = rows / block;
    Node* n = make(w, v);
    n->value = Tensor({rows, k});
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const std::size_t r0 = gi * block;
      for (std::size_t i = 0; i < block; ++i) {
        const double* __restrict__ wrow = w->val().row(r0 + i);
        double* __restrict__ out = n->value.row(r0 + i);
        for (std::size_t j = 0; j < block; ++j) {
          const double wij = wrow[j];
          if (wij == 0.0) continue;
          const double* __restrict__ vrow = v->val().row(r0 + j);
          for (std::size_t l = 0; l < k; ++l) out[l] += wij * vrow[l];
        }
      }
    }
    n->backprop = [w, v, block, groups, k](Node& self, GradVec&) {
      if (w->needs_grad) w->ensure_grad();
      if (v->needs_grad) v->ensure_grad();
      for (std::size_t gi = 0; gi < groups; ++gi) {
        const std::size_t r0 = gi * block;
        for (std::size_t i = 0; i < block; ++i) {
          const double* __restrict__ dout = self.grad.row(r0 + i);
          for (std::size_t j = 0; j < block; ++j) {
            if (w->needs_grad) {
              const double* __restrict__ vrow = v->val().row(r0 + j);
              double acc = 0.0;
              for (std::size_t l = 0; l < k; ++l) acc += dout[l] * vrow[l];
              w->grad.at(r0 + i, j) += acc;
            }
            if (v->needs_grad) {
              const double wij = w->val().at(r0 + i, j);
              if (wij == 0.0) continue;
              double* __restrict__ dv = v->grad.row(r0 + j);
              for (std::size_t l = 0; l < k; ++l) dv[l] += wij * dout[l];
            }
          }
        }
      }
    };
    return n;
  }

  /// Vertically concatenates matrices with equal column counts.
  Node* concat_rows(std::span<Node* const> parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    const std::size_t k = parts[0]->val().cols();
    std::size_t rows = 0;
    for (Node* p : parts) {
      require_matrix(p->val(), "concat_rows");
      if (p->val().cols() != k) throw ShapeError("concat_rows: col mismatch");
      rows += p->val().rows();
    }
    Node* n = make();
    for (Node* p : parts) attach(n, p);
    n->value = Tensor({rows, k});
    std::size_t off = 0;
    for (Node* p : parts) {
      const std::size_t sz = p->val().size();
      std::copy(p->val().v.begin(), p->val().v.end(), n->value.v.begin() + off);
      off += sz;
    }
    std::vector<Node*> owned(parts.begin(), parts.end());
    n->backprop = [owned](Node& self, GradVec&) {
      std::size_t off = 0;
      for (Node* p : owned) {
        const std::size_t sz = p->val().size();
        if (p->needs_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < sz; ++i) {
            p->grad.v[i] += self.grad.v[off + i];
          }
        }
        off += sz;
      }
    };
    return n;
  }

  /// Contiguous row range [lo, hi).
  Node* slice_rows(Node* a, std::size_t lo, std::size_t hi) {
    require_matrix(a->val(), "slice_rows");
    if (lo >= hi || hi > a->val().rows()) throw ShapeError("slice_rows: range");
    const std::size_t k = a->val().cols(), rows = hi - lo;
    Node* n = make(a);
    n->value = Tensor({rows, k});
    std::copy(a->val().row(lo), a->val().row(lo) + rows * k, n->value.v.begin());
    n->backprop = [a, lo, rows, k](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      double* dst = a->grad.row(lo);
      for (std::size_t i = 0; i < rows * k; ++i) dst[i] += self.grad.v[i];
    };
    return n;
  }

  Node* slice_row(Node* a, std::size_t i) {
    require_matrix(a->val(), "slice_row");
    if (i >= a->val().rows()) throw ShapeError("slice_row: index");
    const std::size_t k = a->val().cols();
    Node* n = make(a);
    n->value = Tensor({1, k});
    for (std::size_t j = 0; j < k; ++j) n->value.v[j] = a->val().at(i, j);
    n->backprop = [a, i, k](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      for (std::size_t j = 0; j < k; ++j) a->grad.at(i, j) += self.grad.v[j];
    };
    return n;
  }

  /// Selects rows by index; duplicates allowed. Backward scatter-adds.
  Node* gather_rows(Node* a, std::vector<std::size_t> idx) {
    require_matrix(a->val(), "gather_rows");
    const std::size_t k = a->val().cols();
    Node* n = make(a);
    n->value = Tensor({idx.size(), k});
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= a->val().rows()) throw ShapeError("gather_rows: index");
      const double* src = a->val().row(idx[i]);
      double* dst = n->value.row(i);
      for (std::size_t j = 0; j < k; ++j) dst[j] = src[j];
    }
    n->backprop = [a, idx = std::move(idx), k](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = self.grad.row(i);
        double* dst = a->grad.row(idx[i]);
        for (std::size_t j = 0; j < k; ++j) dst[j] += src[j];
      }
    };
    return n;
  }

  /// Same flat data under a new shape.
  Node* reshape(Node* a, std::vector<std::size_t> shape) {
    if (Tensor::count(shape) != a->val().size()) {
      throw ShapeError("reshape: element count mismatch");
    }
    Node* n = make(a);
    n->value = Tensor(std::move(shape), a->val().v);
    n->backprop = [a](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        a->grad.v[i] += self.grad.v[i];
      }
    };
    return n;
  }

  /// Scalar p = sum(a .* w) for a fixed weighting; handy for making scalar
  /// objectives out of matrix-valued outputs in tests.
  Node* weighted_sum(Node* a, Tensor w) {
    if (w.size() != a->val().size()) throw ShapeError("weighted_sum: size");
    Node* n = make(a);
    n->value = Tensor({1, 1});
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += a->val().v[i] * w.v[i];
    n->value.v[0] = acc;
    auto wp = std::make_shared<Tensor>(std::move(w));
    n->backprop = [a, wp](Node& self, GradVec&) {
      if (!a->needs_grad) return;
      a->ensure_grad();
      const double dy = self.grad.v[0];
      for (std::size_t i = 0; i < wp->size(); ++i) {
        a->grad.v[i] += dy * wp->v[i];
      }
    };
    return n;
  }

  // ---- backward ---------------------------------------------------------

  /// Seeds d(root)/d(root) = seed and sweeps the tape in reverse, adding
  /// parameter gradients into `sink`.
  void backward(Node* root, double seed, GradVec& sink) {
    if (root->val().size() != 1) {
      throw ShapeError("backward: root must be scalar");
    }
    root->ensure_grad();
    root->grad.v[0] += seed;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Node& n = **it;
      if (!n.grad.empty() && n.backprop) n.backprop(n, sink);
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

  static double mish_value(double x) {
    double sp = x > 30.0 ? x : std::log1p(std::exp(x));
    return x * std::tanh(sp);
  }

  static double mish_derivative(double x) {
    double sp = x > 30.0 ? x : std::log1p(std::exp(x));
    double t = std::tanh(sp);
    double s = 1.0 / (1.0 + std::exp(-x));
    return t + x * s * (1.0 - t * t);
  }

 private:
  Node* make() {
    nodes_.push_back(std::make_unique<Node>());
    return nodes_.back().get();
  }
  Node* make(Node* a) {
    Node* n = make();
    attach(n, a);
    return n;
  }
  Node* make(Node* a, Node* b) {
    Node* n = make();
    attach(n, a);
    attach(n, b);
    return n;
  }
  Node* make(Node* a, Node* b, Node* c) {
    Node* n = make();
    attach(n, a);
    attach(n, b);
    attach(n, c);
    return n;
  }
  static void attach(Node* n, Node* input) {
    n->needs_grad = n->needs_grad || input->needs_grad;
  }

  std::vector<std::unique_ptr<Node>> nodes_;
  std::unordered_map<const Parameter*, Node*> leaves_;
};

}  // namespace glick::nn
