// NEON variants for aarch64. Two float64x2 registers carry lanes (l0,l1)
// and (l2,l3); the combine vaddq + vpadd reproduces the scalar reference's
// (l0+l2)+(l1+l3) order, so results stay bit-identical to the other
// backends.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

namespace evonarx::kern::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t l01 = vdupq_n_f64(0.0);
  float64x2_t l23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l01 = vaddq_f64(l01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    l23 = vaddq_f64(l23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double l[4] = {vgetq_lane_f64(l01, 0), vgetq_lane_f64(l01, 1),
                 vgetq_lane_f64(l23, 0), vgetq_lane_f64(l23, 1)};
  for (std::size_t k = 0; i + k < n; ++k) l[k] += a[i + k] * b[i + k];
  return (l[0] + l[2]) + (l[1] + l[3]);
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  float64x2_t l01 = vdupq_n_f64(0.0);
  float64x2_t l23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l01 = vaddq_f64(l01, vabsq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
    l23 = vaddq_f64(
        l23, vabsq_f64(vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2))));
  }
  double l[4] = {vgetq_lane_f64(l01, 0), vgetq_lane_f64(l01, 1),
                 vgetq_lane_f64(l23, 0), vgetq_lane_f64(l23, 1)};
  for (std::size_t k = 0; i + k < n; ++k) l[k] += std::fabs(a[i + k] - b[i + k]);
  return (l[0] + l[2]) + (l[1] + l[3]);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  float64x2_t l01 = vdupq_n_f64(0.0);
  float64x2_t l23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    l01 = vaddq_f64(l01, vmulq_f64(d0, d0));
    l23 = vaddq_f64(l23, vmulq_f64(d1, d1));
  }
  double l[4] = {vgetq_lane_f64(l01, 0), vgetq_lane_f64(l01, 1),
                 vgetq_lane_f64(l23, 0), vgetq_lane_f64(l23, 1)};
  for (std::size_t k = 0; i + k < n; ++k) {
    const double d = a[i + k] - b[i + k];
    l[k] += d * d;
  }
  return (l[0] + l[2]) + (l[1] + l[3]);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace evonarx::kern::neon

#endif  // __aarch64__
