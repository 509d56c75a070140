#pragma once

#include <cstddef>

// Data-parallel inner loops used by the network forward/backward paths and
// the image operators. Every kernel has a scalar reference implementation
// and (on x86-64) an AVX2+FMA variant; the active one is chosen at runtime.
// SIMD variants may reassociate sums, so results can differ from the scalar
// reference in the last bits; the equivalence tests bound that difference.
namespace zsel::kernels {

enum class Backend { kAuto, kScalar, kAvx2 };

// Selects the implementation behind the free functions below and returns the
// backend actually activated (kAuto resolves to the best supported one).
// Requesting kAvx2 on a CPU without AVX2 falls back to kScalar.
Backend select_backend(Backend request);
Backend active_backend();
const char* backend_name(Backend b);
bool cpu_has_avx2();

// y = W x + bias, W row-major rows x cols. bias may be null.
void matvec(const float* w, const float* x, const float* bias, float* y,
            std::size_t rows, std::size_t cols);

// y = (mean + sigma .* eps) x + bias  -- one fused pass over the sampled
// weights so the perturbed matrix is never materialized.
void matvec_sampled(const float* mean, const float* sigma, const float* eps,
                    const float* x, const float* bias, float* y,
                    std::size_t rows, std::size_t cols);

// out = W^T g (out has cols entries).
void matvec_transposed(const float* w, const float* g, float* out,
                       std::size_t rows, std::size_t cols);

// w_grad += g x^T
void outer_accumulate(float* w_grad, const float* g, const float* x,
                      std::size_t rows, std::size_t cols);

float dot(const float* a, const float* b, std::size_t n);

// y += a * x
void axpy(float a, const float* x, float* y, std::size_t n);

// out[i] = clamp(base[i] + scale * delta[i], 0, 1)
void add_scaled_clamp01(const float* base, const float* delta, float scale,
                        float* out, std::size_t n);

// out[i] = a[i] * b[i]
void hadamard(const float* a, const float* b, float* out, std::size_t n);

namespace scalar {
void matvec(const float* w, const float* x, const float* bias, float* y,
            std::size_t rows, std::size_t cols);
void matvec_sampled(const float* mean, const float* sigma, const float* eps,
                    const float* x, const float* bias, float* y,
                    std::size_t rows, std::size_t cols);
void matvec_transposed(const float* w, const float* g, float* out,
                       std::size_t rows, std::size_t cols);
void outer_accumulate(float* w_grad, const float* g, const float* x,
                      std::size_t rows, std::size_t cols);
float dot(const float* a, const float* b, std::size_t n);
void axpy(float a, const float* x, float* y, std::size_t n);
void add_scaled_clamp01(const float* base, const float* delta, float scale,
                        float* out, std::size_t n);
void hadamard(const float* a, const float* b, float* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void matvec(const float* w, const float* x, const float* bias, float* y,
            std::size_t rows, std::size_t cols);
void matvec_sampled(const float* mean, const float* sigma, const float* eps,
                    const float* x, const float* bias, float* y,
                    std::size_t rows, std::size_t cols);
void matvec_transposed(const float* w, const float* g, float* out,
                       std::size_t rows, std::size_t cols);
void outer_accumulate(float* w_grad, const float* g, const float* x,
                      std::size_t rows, std::size_t cols);
float dot(const float* a, const float* b, std::size_t n);
void axpy(float a, const float* x, float* y, std::size_t n);
void add_scaled_clamp01(const float* base, const float* delta, float scale,
                        float* out, std::size_t n);
void hadamard(const float* a, const float* b, float* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace zsel::kernels
