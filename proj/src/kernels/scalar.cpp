#include "dpviz/kernels.hpp"

namespace dpviz::kernels {

namespace {

double weighted_sq_dist(const double* x, const double* mean, const double* prec, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x[j] - mean[j];
    s += prec[j] * d * d;
  }
  return s;
}

void axpy(double w, const double* x, double* acc, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] += w * x[j];
}

void weighted_sq_dev(double w, const double* x, const double* mean, double* acc, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc[j] += w * d * d;
  }
}

constexpr KernelTable kScalar{Isa::Scalar, &weighted_sq_dist, &axpy, &weighted_sq_dev};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace dpviz::kernels
