#include "zsel/kernels.hpp"

// Reference implementations. These define the semantics the SIMD variants
// are tested against; keep them straightforward.

namespace zsel::kernels::scalar {

float dot(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void matvec(const float* w, const float* x, const float* bias, float* y,
            std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    float acc = bias ? bias[r] : 0.0f;
    const float* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec_sampled(const float* mean, const float* sigma, const float* eps,
                    const float* x, const float* bias, float* y,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    float acc = bias ? bias[r] : 0.0f;
    const std::size_t off = r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const float w = mean[off + c] + sigma[off + c] * eps[off + c];
      acc += w * x[c];
    }
    y[r] = acc;
  }
}

void matvec_transposed(const float* w, const float* g, float* out,
                       std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0f;
  for (std::size_t r = 0; r < rows; ++r) {
    const float gr = g[r];
    const float* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += gr * row[c];
  }
}

void outer_accumulate(float* w_grad, const float* g, const float* x,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const float gr = g[r];
    float* row = w_grad + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scaled_clamp01(const float* base, const float* delta, float scale,
                        float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    float v = base[i] + scale * delta[i];
    if (v < 0.0f) v = 0.0f;
    if (v > 1.0f) v = 1.0f;
    out[i] = v;
  }
}

void hadamard(const float* a, const float* b, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace zsel::kernels::scalar
