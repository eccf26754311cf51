#pragma once

#include <span>

namespace dpviz {

/// psi(x) for x > 0, absolute error below 1e-10. Throws DomainError for x <= 0.
double digamma(double x);

/// log(sum(exp(v))) with max-shift. Entries may be -inf; throws EmptyInput on empty v.
double log_sum_exp(std::span<const double> v);

/// KL(Beta(a1, b1) || Beta(a2, b2)).
double kl_beta(double a1, double b1, double a2, double b2);

/// KL(Gamma(a1, rate b1) || Gamma(a2, rate b2)).
double kl_gamma(double a1, double b1, double a2, double b2);

/// KL between one-dimensional Normal-Gamma distributions
/// NG(m, beta, a, b): lambda ~ Gamma(a, rate b), mu | lambda ~ N(m, 1/(beta*lambda)).
double kl_normal_gamma(double m1, double beta1, double a1, double b1,
                       double m2, double beta2, double a2, double b2);

}  // namespace dpviz
