#include "zsel/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// AVX2+FMA variants. This TU is compiled with -mavx2 -mfma and must only be
// entered after the dispatcher has confirmed CPU support.

namespace zsel::kernels::avx2 {

namespace {

inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

}  // namespace

float dot(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  float acc = hsum256(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void matvec(const float* w, const float* x, const float* bias, float* y,
            std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const float base = bias ? bias[r] : 0.0f;
    y[r] = base + dot(w + r * cols, x, cols);
  }
}

// Accumulation structure mirrors dot() so that sigma == 0 reproduces
// matvec() bit for bit (the zero-variance collapse contract).
void matvec_sampled(const float* mean, const float* sigma, const float* eps,
                    const float* x, const float* bias, float* y,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t off = r * cols;
    const float* m = mean + off;
    const float* s = sigma + off;
    const float* e = eps + off;
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t c = 0;
    for (; c + 16 <= cols; c += 16) {
      const __m256 w0 = _mm256_fmadd_ps(_mm256_loadu_ps(s + c),
                                        _mm256_loadu_ps(e + c),
                                        _mm256_loadu_ps(m + c));
      const __m256 w1 = _mm256_fmadd_ps(_mm256_loadu_ps(s + c + 8),
                                        _mm256_loadu_ps(e + c + 8),
                                        _mm256_loadu_ps(m + c + 8));
      acc0 = _mm256_fmadd_ps(w0, _mm256_loadu_ps(x + c), acc0);
      acc1 = _mm256_fmadd_ps(w1, _mm256_loadu_ps(x + c + 8), acc1);
    }
    for (; c + 8 <= cols; c += 8) {
      const __m256 wv = _mm256_fmadd_ps(_mm256_loadu_ps(s + c),
                                        _mm256_loadu_ps(e + c),
                                        _mm256_loadu_ps(m + c));
      acc0 = _mm256_fmadd_ps(wv, _mm256_loadu_ps(x + c), acc0);
    }
    float sum = hsum256(_mm256_add_ps(acc0, acc1));
    for (; c < cols; ++c) sum += (m[c] + s[c] * e[c]) * x[c];
    y[r] = (bias ? bias[r] : 0.0f) + sum;
  }
}

void matvec_transposed(const float* w, const float* g, float* out,
                       std::size_t rows, std::size_t cols) {
  std::size_t c = 0;
  for (; c + 8 <= cols; c += 8) _mm256_storeu_ps(out + c, _mm256_setzero_ps());
  for (; c < cols; ++c) out[c] = 0.0f;
  for (std::size_t r = 0; r < rows; ++r) {
    axpy(g[r], w + r * cols, out, cols);
  }
}

void outer_accumulate(float* w_grad, const float* g, const float* x,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy(g[r], x, w_grad + r * cols, cols);
  }
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void add_scaled_clamp01(const float* base, const float* delta, float scale,
                        float* out, std::size_t n) {
  const __m256 sv = _mm256_set1_ps(scale);
  const __m256 zero = _mm256_setzero_ps();
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_fmadd_ps(sv, _mm256_loadu_ps(delta + i), _mm256_loadu_ps(base + i));
    v = _mm256_min_ps(_mm256_max_ps(v, zero), one);
    _mm256_storeu_ps(out + i, v);
  }
  for (; i < n; ++i) {
    float v = base[i] + scale * delta[i];
    if (v < 0.0f) v = 0.0f;
    if (v > 1.0f) v = 1.0f;
    out[i] = v;
  }
}

void hadamard(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace zsel::kernels::avx2

#endif  // x86-64
