#include "evonarx/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace evonarx::kern {

namespace {

struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_abs_diff)(const double*, const double*, std::size_t);
  double (*sum_sq_diff)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

// ---- scalar reference ----
// Four independent lanes, element i feeds lane i%4; tail elements keep the
// same lane assignment. Combine order: (l0+l2)+(l1+l3).

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += a[i] * b[i];
    l1 += a[i + 1] * b[i + 1];
    l2 += a[i + 2] * b[i + 2];
    l3 += a[i + 3] * b[i + 3];
  }
  if (i < n) l0 += a[i] * b[i];
  if (i + 1 < n) l1 += a[i + 1] * b[i + 1];
  if (i + 2 < n) l2 += a[i + 2] * b[i + 2];
  return (l0 + l2) + (l1 + l3);
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += std::fabs(a[i] - b[i]);
    l1 += std::fabs(a[i + 1] - b[i + 1]);
    l2 += std::fabs(a[i + 2] - b[i + 2]);
    l3 += std::fabs(a[i + 3] - b[i + 3]);
  }
  if (i < n) l0 += std::fabs(a[i] - b[i]);
  if (i + 1 < n) l1 += std::fabs(a[i + 1] - b[i + 1]);
  if (i + 2 < n) l2 += std::fabs(a[i + 2] - b[i + 2]);
  return (l0 + l2) + (l1 + l3);
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    l0 += d0 * d0;
    l1 += d1 * d1;
    l2 += d2 * d2;
    l3 += d3 * d3;
  }
  for (std::size_t k = 0; i + k < n; ++k) {
    const double d = a[i + k] - b[i + k];
    switch (k) {
      case 0: l0 += d * d; break;
      case 1: l1 += d * d; break;
      case 2: l2 += d * d; break;
    }
  }
  return (l0 + l2) + (l1 + l3);
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

constexpr Ops scalar_ops = {dot_scalar, sum_abs_diff_scalar, sum_sq_diff_scalar,
                            axpy_scalar};

}  // namespace

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double*, const double*, std::size_t);
double sum_abs_diff(const double*, const double*, std::size_t);
double sum_sq_diff(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
}  // namespace avx2
#endif
#if defined(__aarch64__)
namespace neon {
double dot(const double*, const double*, std::size_t);
double sum_abs_diff(const double*, const double*, std::size_t);
double sum_sq_diff(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
}  // namespace neon
#endif

namespace {

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Ops* ops_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2: {
      static const Ops avx2_ops = {avx2::dot, avx2::sum_abs_diff,
                                   avx2::sum_sq_diff, avx2::axpy};
      return &avx2_ops;
    }
#endif
#if defined(__aarch64__)
    case Backend::Neon: {
      static const Ops neon_ops = {neon::dot, neon::sum_abs_diff,
                                   neon::sum_sq_diff, neon::axpy};
      return &neon_ops;
    }
#endif
    default:
      return nullptr;
  }
}

Backend detect_backend() {
  if (const char* env = std::getenv("EVONARX_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::Avx2))
      return Backend::Avx2;
    if (std::strcmp(env, "neon") == 0 && backend_supported(Backend::Neon))
      return Backend::Neon;
  }
  if (backend_supported(Backend::Avx2)) return Backend::Avx2;
  if (backend_supported(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

struct Dispatch {
  std::atomic<const Ops*> ops;
  std::atomic<Backend> backend;
  Dispatch() {
    const Backend b = detect_backend();
    backend.store(b, std::memory_order_relaxed);
    ops.store(ops_for(b), std::memory_order_relaxed);
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() {
  return dispatch().backend.load(std::memory_order_relaxed);
}

bool set_backend(Backend b) {
  if (!backend_supported(b)) return false;
  dispatch().backend.store(b, std::memory_order_relaxed);
  dispatch().ops.store(ops_for(b), std::memory_order_relaxed);
  return true;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().ops.load(std::memory_order_relaxed)->dot(a, b, n);
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  return dispatch().ops.load(std::memory_order_relaxed)->sum_abs_diff(a, b, n);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return dispatch().ops.load(std::memory_order_relaxed)->sum_sq_diff(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().ops.load(std::memory_order_relaxed)->axpy(alpha, x, y, n);
}

}  // namespace evonarx::kern
