// Compiled with -mavx2 -mfma. Nothing here may run before isa_available(Avx2).

#include "dpviz/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace dpviz::kernels {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double weighted_sq_dist(const double* x, const double* mean, const double* prec, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(mean + j));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(mean + j + 4));
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(prec + j), d0), d0, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(prec + j + 4), d1), d1, acc1);
  }
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(mean + j));
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(prec + j), d), d, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    s += prec[j] * d * d;
  }
  return s;
}

void axpy(double w, const double* x, double* acc, std::size_t n) {
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
    _mm256_storeu_pd(acc + j, _mm256_fmadd_pd(vw, _mm256_loadu_pd(x + j), _mm256_loadu_pd(acc + j)));
  for (; j < n; ++j) acc[j] += w * x[j];
}

void weighted_sq_dev(double w, const double* x, const double* mean, double* acc, std::size_t n) {
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(mean + j));
    _mm256_storeu_pd(acc + j,
                     _mm256_fmadd_pd(_mm256_mul_pd(vw, d), d, _mm256_loadu_pd(acc + j)));
  }
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc[j] += w * d * d;
  }
}

constexpr KernelTable kAvx2{Isa::Avx2, &weighted_sq_dist, &axpy, &weighted_sq_dev};

}  // namespace

const KernelTable* detail::avx2_table() noexcept { return &kAvx2; }

}  // namespace dpviz::kernels

#else

namespace dpviz::kernels {
const KernelTable* detail::avx2_table() noexcept { return nullptr; }
}  // namespace dpviz::kernels

#endif
