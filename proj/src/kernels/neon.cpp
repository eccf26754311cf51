// AArch64 NEON variant (float64x2). Advanced SIMD is mandatory on AArch64,
// so no runtime probe is needed beyond the compile-time guard.

#include "dpviz/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace dpviz::kernels {

namespace {

double weighted_sq_dist(const double* x, const double* mean, const double* prec, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(x + j), vld1q_f64(mean + j));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(x + j + 2), vld1q_f64(mean + j + 2));
    acc0 = vfmaq_f64(acc0, vmulq_f64(vld1q_f64(prec + j), d0), d0);
    acc1 = vfmaq_f64(acc1, vmulq_f64(vld1q_f64(prec + j + 2), d1), d1);
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    s += prec[j] * d * d;
  }
  return s;
}

void axpy(double w, const double* x, double* acc, std::size_t n) {
  const float64x2_t vw = vdupq_n_f64(w);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) vst1q_f64(acc + j, vfmaq_f64(vld1q_f64(acc + j), vw, vld1q_f64(x + j)));
  for (; j < n; ++j) acc[j] += w * x[j];
}

void weighted_sq_dev(double w, const double* x, const double* mean, double* acc, std::size_t n) {
  const float64x2_t vw = vdupq_n_f64(w);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + j), vld1q_f64(mean + j));
    vst1q_f64(acc + j, vfmaq_f64(vld1q_f64(acc + j), vmulq_f64(vw, d), d));
  }
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc[j] += w * d * d;
  }
}

constexpr KernelTable kNeon{Isa::Neon, &weighted_sq_dist, &axpy, &weighted_sq_dev};

}  // namespace

const KernelTable* detail::neon_table() noexcept { return &kNeon; }

}  // namespace dpviz::kernels

#else

namespace dpviz::kernels {
const KernelTable* detail::neon_table() noexcept { return nullptr; }
}  // namespace dpviz::kernels

#endif
