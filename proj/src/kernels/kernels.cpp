#include "zsel/kernels.hpp"

#include <atomic>

namespace zsel::kernels {

namespace {

struct Vtable {
  float (*dot)(const float*, const float*, std::size_t);
  void (*matvec)(const float*, const float*, const float*, float*, std::size_t, std::size_t);
  void (*matvec_sampled)(const float*, const float*, const float*, const float*,
                         const float*, float*, std::size_t, std::size_t);
  void (*matvec_transposed)(const float*, const float*, float*, std::size_t, std::size_t);
  void (*outer_accumulate)(float*, const float*, const float*, std::size_t, std::size_t);
  void (*axpy)(float, const float*, float*, std::size_t);
  void (*add_scaled_clamp01)(const float*, const float*, float, float*, std::size_t);
  void (*hadamard)(const float*, const float*, float*, std::size_t);
};

constexpr Vtable kScalarTable = {
    scalar::dot,    scalar::matvec,           scalar::matvec_sampled,
    scalar::matvec_transposed, scalar::outer_accumulate, scalar::axpy,
    scalar::add_scaled_clamp01, scalar::hadamard,
};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Vtable kAvx2Table = {
    avx2::dot,    avx2::matvec,           avx2::matvec_sampled,
    avx2::matvec_transposed, avx2::outer_accumulate, avx2::axpy,
    avx2::add_scaled_clamp01, avx2::hadamard,
};
#endif

Backend resolve(Backend request) {
  if (request == Backend::kAuto) {
    return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
  }
  if (request == Backend::kAvx2 && !cpu_has_avx2()) return Backend::kScalar;
  return request;
}

const Vtable* table_for(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
  if (b == Backend::kAvx2) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const Vtable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::kAuto};

const Vtable* table() {
  const Vtable* t = g_table.load(std::memory_order_acquire);
  if (t) return t;
  select_backend(Backend::kAuto);
  return g_table.load(std::memory_order_acquire);
}

}  // namespace

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend select_backend(Backend request) {
  const Backend resolved = resolve(request);
  g_backend.store(resolved, std::memory_order_relaxed);
  g_table.store(table_for(resolved), std::memory_order_release);
  return resolved;
}

Backend active_backend() {
  table();  // force resolution
  return g_backend.load(std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kAuto: return "auto";
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
  }
  return "?";
}

float dot(const float* a, const float* b, std::size_t n) {
  return table()->dot(a, b, n);
}

void matvec(const float* w, const float* x, const float* bias, float* y,
            std::size_t rows, std::size_t cols) {
  table()->matvec(w, x, bias, y, rows, cols);
}

void matvec_sampled(const float* mean, const float* sigma, const float* eps,
                    const float* x, const float* bias, float* y,
                    std::size_t rows, std::size_t cols) {
  table()->matvec_sampled(mean, sigma, eps, x, bias, y, rows, cols);
}

void matvec_transposed(const float* w, const float* g, float* out,
                       std::size_t rows, std::size_t cols) {
  table()->matvec_transposed(w, g, out, rows, cols);
}

void outer_accumulate(float* w_grad, const float* g, const float* x,
                      std::size_t rows, std::size_t cols) {
  table()->outer_accumulate(w_grad, g, x, rows, cols);
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  table()->axpy(a, x, y, n);
}

void add_scaled_clamp01(const float* base, const float* delta, float scale,
                        float* out, std::size_t n) {
  table()->add_scaled_clamp01(base, delta, scale, out, n);
}

void hadamard(const float* a, const float* b, float* out, std::size_t n) {
  table()->hadamard(a, b, out, n);
}

}  // namespace zsel::kernels
