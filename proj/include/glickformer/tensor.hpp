#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "glickformer/errors.hpp"

namespace glick::nn {

/// Dense row-major tensor of 64-bit reals.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    v.assign(count(shape), 0.0);
  }
  Tensor(std::vector<std::size_t> s, std::vector<double> data)
      : shape(std::move(s)), v(std::move(data)) {
    if (v.size() != count(shape)) {
      throw ShapeError("tensor: data length " + std::to_string(v.size()) +
                       " does not match shape " + shape_str(shape));
    }
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }

  static std::string shape_str(const std::vector<std::size_t>& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << ']';
    return os.str();
  }

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  std::size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double* row(std::size_t i) { return v.data() + i * cols(); }
  const double* row(std::size_t i) const { return v.data() + i * cols(); }

  double& at(std::size_t i, std::size_t j) { return v[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols() + j]; }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }

  bool all_finite() const {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  void add(const Tensor& other) {
    if (other.v.size() != v.size()) {
      throw ShapeError("tensor add: " + shape_str(shape) + " vs " +
                       shape_str(other.shape));
    }
    const double* __restrict__ b = other.v.data();
    double* __restrict__ a = v.data();
    for (std::size_t i = 0; i < v.size(); ++i) a[i] += b[i];
  }
};

inline void require_matrix(const Tensor& t, const char* who) {
  if (t.shape.size() != 2) {
    throw ShapeError(std::string(who) + ": expected a matrix, got " +
                     Tensor::shape_str(t.shape));
  }
}

// C (+)= A * B, A [n,k], B [k,m]. ikj order keeps the inner loop contiguous.
inline void matmul_nn(const Tensor& a, const Tensor& b, Tensor& c,
                      bool accumulate) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k || c.rows() != n || c.cols() != m) {
    throw ShapeError("matmul: " + Tensor::shape_str(a.shape) + " * " +
                     Tensor::shape_str(b.shape) + " -> " +
                     Tensor::shape_str(c.shape));
  }
  if (!accumulate) c.fill(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* __restrict__ arow = a.row(i);
    double* __restrict__ crow = c.row(i);
    for (std::size_t l = 0; l < k; ++l) {
      const double alv = arow[l];
      if (alv == 0.0) continue;
      const double* __restrict__ brow = b.row(l);
      for (std::size_t j = 0; j < m; ++j) crow[j] += alv * brow[j];
    }
  }
}

// C (+)= A * B^T, A [n,k], B [m,k].
inline void matmul_nt(const Tensor& a, const Tensor& b, Tensor& c,
                      bool accumulate) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  if (b.cols() != k || c.rows() != n || c.cols() != m) {
    throw ShapeError("matmul_nt: " + Tensor::shape_str(a.shape) + " * " +
                     Tensor::shape_str(b.shape) + "^T -> " +
                     Tensor::shape_str(c.shape));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* __restrict__ arow = a.row(i);
    double* __restrict__ crow = c.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double* __restrict__ brow = b.row(j);
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

// C (+)= A^T * B, A [k,n], B [k,m].
inline void matmul_tn(const Tensor& a, const Tensor& b, Tensor& c,
                      bool accumulate) {
  const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
  if (b.rows() != k || c.rows() != n || c.cols() != m) {
    throw ShapeError("matmul_tn: " + Tensor::shape_str(a.shape) + "^T * " +
                     Tensor::shape_str(b.shape) + " -> " +
                     Tensor::shape_str(c.shape));
  }
  if (!accumulate) c.fill(0.0);
  for (std::size_t l = 0; l < k; ++l) {
    const double* __restrict__ arow = a.row(l);
    const double* __restrict__ brow = b.row(l);
    for (std::size_t i = 0; i < n; ++i) {
      const double ail = arow[i];
      if (ail == 0.0) continue;
      double* __restrict__ crow = c.row(i);
      for (std::size_t j = 0; j < m; ++j) crow[j] += ail * brow[j];
    }
  }
}

}  // namespace glick::nn
