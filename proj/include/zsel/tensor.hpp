#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace zsel {

// Dense row-major float tensor. Rank 1 and 2 are all the network needs.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), 0.0f);
  }
  Tensor(std::initializer_list<float> values)
      : shape{values.size()}, data(values) {}

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<std::size_t> s, float v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
  }

  std::size_t numel() const { return data.size(); }

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  float& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  float& operator[](std::size_t i) { return data[i]; }
  float operator[](std::size_t i) const { return data[i]; }

  bool all_finite() const {
    for (float v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) {
      if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
      n *= d;
    }
    return s.empty() ? 0 : n;
  }
};

}  // namespace zsel
