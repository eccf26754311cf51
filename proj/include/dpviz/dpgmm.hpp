#pragma once

// Truncated stick-breaking variational inference for a Dirichlet process
// mixture of diagonal Gaussians.
//
// Generative model (T = truncation):
//   v_k ~ Beta(1, alpha) for k < T, v_T = 1,  pi_k = v_k prod_{j<k} (1 - v_j)
//   lambda_kd ~ Gamma(a0, b0_d),  mu_kd | lambda_kd ~ N(m0_d, 1 / (beta0 lambda_kd))
//   x_n | z_n = k ~ N(mu_k, diag(lambda_k)^-1)
// Variational family:
//   q(v_k) = Beta(gamma1_k, gamma2_k)
//   q(mu_k, lambda_k) = prod_d NormalGamma(m_kd, beta_k, a_k, b_kd)
//   q(z_n) = Categorical(phi_n)
//
// Component indices are 0-based in code; component T-1 is the terminal stick.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dpviz/kernels.hpp"
#include "dpviz/pointset.hpp"

namespace dpviz {

/// Normal-Gamma prior. Unset m0 means "data mean"; unset b0 means
/// "a0 times the per-dimension data variance".
struct PriorSpec {
  std::optional<std::vector<double>> m0;
  double beta0 = 1.0;
  double a0 = 1.0;
  std::optional<std::vector<double>> b0;
};

struct ResolvedPrior {
  std::vector<double> m0;
  double beta0 = 1.0;
  double a0 = 1.0;
  std::vector<double> b0;
  friend bool operator==(const ResolvedPrior&, const ResolvedPrior&) = default;
};

inline constexpr double kPrecisionFloor = 1e-12;  // lower clamp on every b entry
inline constexpr double kPhiFloor = 1e-300;       // smaller responsibilities are zeroed
inline constexpr double kDefaultWeightThreshold = 0.01;

struct DpgmmConfig {
  double alpha = 0.2;
  std::size_t truncation = 50;
  double tol = 1e-4;
  std::size_t max_iter = 500;
  std::uint64_t seed = 0;
  PriorSpec priors;
  unsigned threads = 1;
  std::optional<kernels::Isa> isa;  // unset: detect_isa()
  bool warn_unscaled = true;

  /// Throws InvalidConfig when a field is out of its domain.
  void validate() const;
};

/// Execution knobs shared by the per-point passes.
struct ExecPolicy {
  unsigned threads = 1;
  kernels::Isa isa = kernels::detect_isa();
};

struct DpgmmModel {
  std::size_t dim = 0;
  std::size_t truncation = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::size_t max_iter = 0;
  ResolvedPrior prior;

  std::vector<double> gamma1, gamma2;  // T; the terminal entry stays (1, alpha)
  std::vector<double> beta, a;         // T
  std::vector<double> m, b;            // T x dim, row-major
  std::vector<double> mass;            // T; N_k from the last component update

  // Preprocessing the model was fitted under, re-applied by predict callers.
  PointMode mode = PointMode::Vector;
  std::optional<ScaleRecord> scale;
  std::vector<ScaleRecord> feature_scale;

  std::vector<double> elbo_trace;
  bool converged = false;

  std::span<const double> mean(std::size_t k) const { return {m.data() + k * dim, dim}; }
  std::span<const double> rate(std::size_t k) const { return {b.data() + k * dim, dim}; }

  friend bool operator==(const DpgmmModel&, const DpgmmModel&) = default;
};

/// Row-major n_points x T matrix of component probabilities.
class Responsibilities {
 public:
  Responsibilities() = default;
  Responsibilities(std::size_t n_points, std::size_t components)
      : n_(n_points), t_(components), phi_(n_points * components, 0.0) {}

  std::size_t n_points() const noexcept { return n_; }
  std::size_t components() const noexcept { return t_; }
  double operator()(std::size_t n, std::size_t k) const { return phi_[n * t_ + k]; }
  double& operator()(std::size_t n, std::size_t k) { return phi_[n * t_ + k]; }
  std::span<const double> row(std::size_t n) const { return {phi_.data() + n * t_, t_}; }
  std::span<double> row(std::size_t n) { return {phi_.data() + n * t_, t_}; }

 private:
  std::size_t n_ = 0;
  std::size_t t_ = 0;
  std::vector<double> phi_;
};

struct StickParams {
  std::vector<double> gamma1, gamma2;
};

struct ComponentParams {
  std::vector<double> m, beta, a, b, mass;
};

struct FitResult {
  DpgmmModel model;
  std::vector<double> elbo_trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t effective_components = 0;
};

/// State handed to a fit observer after each completed iteration.
struct IterationView {
  std::size_t iteration;  // 1-based
  const DpgmmModel& model;
  const Responsibilities& phi;
  double elbo;
};
using FitObserver = std::function<void(const IterationView&)>;

ResolvedPrior resolve_prior(const PriorSpec& spec, const PointMatrix& pm);

DpgmmModel init(const PointMatrix& pm, const DpgmmConfig& cfg);

Responsibilities update_responsibilities(const DpgmmModel& model, const PointMatrix& pm,
                                         const ExecPolicy& exec = {});

StickParams update_sticks(const Responsibilities& phi, double alpha);

ComponentParams update_components(const Responsibilities& phi, const PointMatrix& pm,
                                  const ResolvedPrior& prior, const ExecPolicy& exec = {});

/// Evidence lower bound of (model, phi) on pm. Throws NonFiniteElbo.
double elbo(const DpgmmModel& model, const Responsibilities& phi, const PointMatrix& pm,
            const ExecPolicy& exec = {});

FitResult fit(const PointMatrix& pm, const DpgmmConfig& cfg, const FitObserver& observer = {});

std::vector<double> expected_weights(const DpgmmModel& model);

std::size_t effective_components(const DpgmmModel& model,
                                 double weights_threshold = kDefaultWeightThreshold);

/// Component index -> public cluster id, ordered by descending mass (ties: lower index).
std::vector<std::int32_t> relabel_by_mass(const DpgmmModel& model);

/// Hard assignments as public cluster ids (id 0 = most massive component).
std::vector<std::int32_t> predict(const DpgmmModel& model, const PointMatrix& pm,
                                  const ExecPolicy& exec = {});

/// Expected weights reindexed by public cluster id.
std::vector<double> weights_by_cluster_id(const DpgmmModel& model);

}  // namespace dpviz
