#include "dpviz/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpviz/error.hpp"

namespace dpviz {

double digamma(double x) {
  if (!(x > 0.0) || std::isinf(x))
    throw Error(Errc::DomainError, "digamma argument " + std::to_string(x));
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum B_2k / (2k x^2k)
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      r2 * (1.0 / 12 -
            r2 * (1.0 / 120 -
                  r2 * (1.0 / 252 -
                        r2 * (1.0 / 240 - r2 * (1.0 / 132 - r2 * (691.0 / 32760 - r2 / 12))))));
  return acc + std::log(x) - 0.5 * r - series;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw Error(Errc::EmptyInput, "log_sum_exp of empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double sum = 0.0;
  for (double e : v) sum += std::exp(e - mx);
  return mx + std::log(sum);
}

namespace {
double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}
}  // namespace

double kl_beta(double a1, double b1, double a2, double b2) {
  const double psi_sum = digamma(a1 + b1);
  return log_beta_fn(a2, b2) - log_beta_fn(a1, b1) + (a1 - a2) * (digamma(a1) - psi_sum) +
         (b1 - b2) * (digamma(b1) - psi_sum);
}

double kl_gamma(double a1, double b1, double a2, double b2) {
  return (a1 - a2) * digamma(a1) - std::lgamma(a1) + std::lgamma(a2) +
         a2 * (std::log(b1) - std::log(b2)) + a1 * (b2 - b1) / b1;
}

double kl_normal_gamma(double m1, double beta1, double a1, double b1,
                       double m2, double beta2, double a2, double b2) {
  const double diff = m1 - m2;
  const double normal_part =
      0.5 * (std::log(beta1 / beta2) + beta2 / beta1 - 1.0 + beta2 * (a1 / b1) * diff * diff);
  return kl_gamma(a1, b1, a2, b2) + normal_part;
}

}  // namespace dpviz
