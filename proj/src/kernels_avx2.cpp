// AVX2 variants. Lane layout matches the scalar reference: one 4-wide
// accumulator register holds lanes l0..l3, tail elements are folded into
// their i%4 lane, and the final combine is (l0+l2)+(l1+l3). mul/add
// intrinsics are used instead of fmadd so each element sees the same two
// roundings as the scalar path.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace evonarx::kern::avx2 {

namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  if (i < n) l[0] += a[i] * b[i];
  if (i + 1 < n) l[1] += a[i + 1] * b[i + 1];
  if (i + 2 < n) l[2] += a[i + 2] * b[i + 2];
  return (l[0] + l[2]) + (l[1] + l[3]);
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(
        acc,
        abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  for (std::size_t k = 0; i + k < n; ++k) {
    l[k] += std::fabs(a[i + k] - b[i + k]);
  }
  return (l[0] + l[2]) + (l[1] + l[3]);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  for (std::size_t k = 0; i + k < n; ++k) {
    const double d = a[i + k] - b[i + k];
    l[k] += d * d;
  }
  return (l[0] + l[2]) + (l[1] + l[3]);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t =
        _mm256_add_pd(_mm256_loadu_pd(y + i),
                      _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, t);
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace evonarx::kern::avx2

#endif  // x86_64
