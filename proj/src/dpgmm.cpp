#include "dpviz/dpgmm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "dpviz/error.hpp"
#include "dpviz/special.hpp"
#include "parallel.hpp"

namespace dpviz {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

void require_dim(const DpgmmModel& model, const PointMatrix& pm) {
  if (model.dim != pm.dim())
    throw Error(Errc::DimMismatch, "model dim " + std::to_string(model.dim) + " vs points dim " +
                                       std::to_string(pm.dim()));
}

// Per-component pieces of the responsibility score
//   s_nk = offset_k - 1/2 sum_d prec_kd (x_nd - m_kd)^2
struct ScoreTerms {
  std::vector<double> offset;  // T
  std::vector<double> prec;    // T x dim
};

// E[log pi_k] under q(v): E[log v_k] + sum_{j<k} E[log(1 - v_j)], with E[log v_T] = 0.
std::vector<double> expected_log_pi(const DpgmmModel& model) {
  const std::size_t T = model.truncation;
  std::vector<double> out(T);
  double tail = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    if (k + 1 == T) {
      out[k] = tail;
      break;
    }
    const double psi_sum = digamma(model.gamma1[k] + model.gamma2[k]);
    out[k] = tail + digamma(model.gamma1[k]) - psi_sum;
    tail += digamma(model.gamma2[k]) - psi_sum;
  }
  return out;
}

ScoreTerms score_terms(const DpgmmModel& model) {
  const std::size_t T = model.truncation, D = model.dim;
  ScoreTerms st;
  st.offset = expected_log_pi(model);
  st.prec.resize(T * D);
  for (std::size_t k = 0; k < T; ++k) {
    const double psi_a = digamma(model.a[k]);
    double c = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      const double bkd = model.b[k * D + d];
      c += psi_a - std::log(bkd) - kLog2Pi - 1.0 / model.beta[k];
      st.prec[k * D + d] = model.a[k] / bkd;
    }
    st.offset[k] += 0.5 * c;
  }
  return st;
}

void fill_scores(const ScoreTerms& st, const DpgmmModel& model, const kernels::KernelTable& kt,
                 std::span<const double> x, std::span<double> out) {
  const std::size_t D = model.dim;
  for (std::size_t k = 0; k < model.truncation; ++k)
    out[k] = st.offset[k] -
             0.5 * kt.weighted_sq_dist(x.data(), model.m.data() + k * D, st.prec.data() + k * D, D);
}

// One-hot assignment of every point to its closest component mean (Euclidean,
// ties to the lower index). Seeds the first stick/component update.
Responsibilities nearest_mean_responsibilities(const DpgmmModel& model, const PointMatrix& pm,
                                               const ExecPolicy& exec) {
  const std::size_t N = pm.n_points(), T = model.truncation, D = model.dim;
  const auto& kt = kernels::table_for(exec.isa);
  const std::vector<double> unit(D, 1.0);
  Responsibilities phi(N, T);
  detail::for_each_chunk(detail::make_chunks(N, exec.threads), [&](const detail::Chunk& c) {
    for (std::size_t n = c.begin; n < c.end; ++n) {
      const auto x = pm.row(n);
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t k = 0; k < T; ++k) {
        const double d = kt.weighted_sq_dist(x.data(), model.m.data() + k * D, unit.data(), D);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      phi(n, best) = 1.0;
    }
  });
  return phi;
}

}  // namespace

void DpgmmConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (!(alpha > 0.0) || !std::isfinite(alpha)) bad("alpha must be positive");
  if (truncation < 1) bad("truncation must be at least 1");
  if (!(tol > 0.0)) bad("tol must be positive");
  if (max_iter < 1) bad("max_iter must be at least 1");
  if (threads < 1) bad("threads must be at least 1");
  if (!(priors.beta0 > 0.0)) bad("beta0 must be positive");
  if (!(priors.a0 > 0.0)) bad("a0 must be positive");
  if (priors.b0)
    for (double v : *priors.b0)
      if (!(v > 0.0)) bad("b0 entries must be positive");
}

ResolvedPrior resolve_prior(const PriorSpec& spec, const PointMatrix& pm) {
  const std::size_t N = pm.n_points(), D = pm.dim();
  if (N == 0) throw Error(Errc::EmptyPointSet, "no points");
  ResolvedPrior rp;
  rp.beta0 = spec.beta0;
  rp.a0 = spec.a0;

  std::vector<double> mean(D, 0.0), var(D, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const auto x = pm.row(n);
    for (std::size_t d = 0; d < D; ++d) mean[d] += x[d];
  }
  for (double& v : mean) v /= static_cast<double>(N);
  for (std::size_t n = 0; n < N; ++n) {
    const auto x = pm.row(n);
    for (std::size_t d = 0; d < D; ++d) var[d] += (x[d] - mean[d]) * (x[d] - mean[d]);
  }
  for (double& v : var) v /= static_cast<double>(N);

  if (spec.m0) {
    if (spec.m0->size() != D) throw Error(Errc::DimMismatch, "prior m0 length");
    rp.m0 = *spec.m0;
  } else {
    rp.m0 = mean;
  }
  if (spec.b0) {
    if (spec.b0->size() != D) throw Error(Errc::DimMismatch, "prior b0 length");
    rp.b0 = *spec.b0;
  } else {
    rp.b0.resize(D);
    for (std::size_t d = 0; d < D; ++d) rp.b0[d] = spec.a0 * std::max(var[d], kPrecisionFloor);
  }
  return rp;
}

DpgmmModel init(const PointMatrix& pm, const DpgmmConfig& cfg) {
  cfg.validate();
  const std::size_t N = pm.n_points(), D = pm.dim(), T = cfg.truncation;
  if (N == 0) throw Error(Errc::EmptyPointSet, "cannot initialise from an empty point set");
  if (!pm.is_scaled() && cfg.warn_unscaled)
    std::cerr << "dpviz: warning: fitting unscaled points; priors are data-derived but the "
                 "usual preprocessing is a [0, 10] rescale\n";

  DpgmmModel model;
  model.dim = D;
  model.truncation = T;
  model.alpha = cfg.alpha;
  model.seed = cfg.seed;
  model.tol = cfg.tol;
  model.max_iter = cfg.max_iter;
  model.prior = resolve_prior(cfg.priors, pm);
  model.mode = pm.mode();
  model.scale = pm.scale();
  model.feature_scale = pm.feature_scale();

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> rows(T);
  if (N >= T) {
    // partial Fisher-Yates: the first T slots are a uniform sample without replacement
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < T; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, N - 1);
      std::swap(idx[k], idx[pick(rng)]);
      rows[k] = idx[k];
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, N - 1);
    for (auto& r : rows) r = pick(rng);
  }

  model.m.resize(T * D);
  for (std::size_t k = 0; k < T; ++k) {
    const auto x = pm.row(rows[k]);
    std::copy(x.begin(), x.end(), model.m.begin() + static_cast<std::ptrdiff_t>(k * D));
  }
  model.beta.assign(T, model.prior.beta0);
  model.a.assign(T, model.prior.a0);
  model.b.resize(T * D);
  for (std::size_t k = 0; k < T; ++k)
    std::copy(model.prior.b0.begin(), model.prior.b0.end(),
              model.b.begin() + static_cast<std::ptrdiff_t>(k * D));
  model.gamma1.assign(T, 1.0);
  model.gamma2.assign(T, cfg.alpha);
  model.mass.assign(T, 0.0);
  return model;
}

Responsibilities update_responsibilities(const DpgmmModel& model, const PointMatrix& pm,
                                         const ExecPolicy& exec) {
  require_dim(model, pm);
  const std::size_t N = pm.n_points(), T = model.truncation;
  const ScoreTerms st = score_terms(model);
  const auto& kt = kernels::table_for(exec.isa);
  Responsibilities phi(N, T);
  detail::for_each_chunk(detail::make_chunks(N, exec.threads), [&](const detail::Chunk& c) {
    for (std::size_t n = c.begin; n < c.end; ++n) {
      auto row = phi.row(n);
      fill_scores(st, model, kt, pm.row(n), row);
      const double lse = log_sum_exp(row);
      for (double& v : row) {
        v = std::exp(v - lse);
        if (v < kPhiFloor) v = 0.0;
      }
    }
  });
  return phi;
}

StickParams update_sticks(const Responsibilities& phi, double alpha) {
  const std::size_t N = phi.n_points(), T = phi.components();
  std::vector<double> mass(T, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const auto row = phi.row(n);
    for (std::size_t k = 0; k < T; ++k) mass[k] += row[k];
  }
  StickParams sp;
  sp.gamma1.assign(T, 1.0);
  sp.gamma2.assign(T, alpha);
  double tail = 0.0;  // sum_{j>k} N_j
  for (std::size_t k = T; k-- > 0;) {
    if (k + 1 < T) {
      sp.gamma1[k] = 1.0 + mass[k];
      sp.gamma2[k] = alpha + tail;
    }
    tail += mass[k];
  }
  return sp;
}

ComponentParams update_components(const Responsibilities& phi, const PointMatrix& pm,
                                  const ResolvedPrior& prior, const ExecPolicy& exec) {
  const std::size_t N = pm.n_points(), D = pm.dim(), T = phi.components();
  if (phi.n_points() != N)
    throw Error(Errc::LengthMismatch, "responsibilities rows vs points");
  if (prior.m0.size() != D || prior.b0.size() != D)
    throw Error(Errc::DimMismatch, "prior dim vs points dim");
  const auto& kt = kernels::table_for(exec.isa);
  const auto chunks = detail::make_chunks(N, exec.threads);

  // pass 1: N_k and sum_n phi_nk x_n
  std::vector<std::vector<double>> part_mass(chunks.size(), std::vector<double>(T, 0.0));
  std::vector<std::vector<double>> part_sum(chunks.size(), std::vector<double>(T * D, 0.0));
  detail::for_each_chunk(chunks, [&](const detail::Chunk& c) {
    auto& pm_k = part_mass[c.index];
    auto& ps = part_sum[c.index];
    for (std::size_t n = c.begin; n < c.end; ++n) {
      const auto x = pm.row(n);
      const auto r = phi.row(n);
      for (std::size_t k = 0; k < T; ++k) {
        if (r[k] == 0.0) continue;
        pm_k[k] += r[k];
        kt.axpy(r[k], x.data(), ps.data() + k * D, D);
      }
    }
  });
  std::vector<double> mass = part_mass[0];
  std::vector<double> xbar = part_sum[0];
  for (std::size_t c = 1; c < chunks.size(); ++c) {
    for (std::size_t k = 0; k < T; ++k) mass[k] += part_mass[c][k];
    for (std::size_t i = 0; i < T * D; ++i) xbar[i] += part_sum[c][i];
  }
  for (std::size_t k = 0; k < T; ++k)
    for (std::size_t d = 0; d < D; ++d)
      xbar[k * D + d] = mass[k] > 0.0 ? xbar[k * D + d] / mass[k] : prior.m0[d];

  // pass 2: S_kd = sum_n phi_nk (x_nd - xbar_kd)^2
  std::vector<std::vector<double>> part_dev(chunks.size(), std::vector<double>(T * D, 0.0));
  detail::for_each_chunk(chunks, [&](const detail::Chunk& c) {
    auto& pd = part_dev[c.index];
    for (std::size_t n = c.begin; n < c.end; ++n) {
      const auto x = pm.row(n);
      const auto r = phi.row(n);
      for (std::size_t k = 0; k < T; ++k) {
        if (r[k] == 0.0) continue;
        kt.weighted_sq_dev(r[k], x.data(), xbar.data() + k * D, pd.data() + k * D, D);
      }
    }
  });
  std::vector<double> scatter = part_dev[0];
  for (std::size_t c = 1; c < chunks.size(); ++c)
    for (std::size_t i = 0; i < T * D; ++i) scatter[i] += part_dev[c][i];

  ComponentParams out;
  out.m.resize(T * D);
  out.b.resize(T * D);
  out.beta.resize(T);
  out.a.resize(T);
  for (std::size_t k = 0; k < T; ++k) {
    const double nk = mass[k];
    if (nk == 0.0) {
      out.beta[k] = prior.beta0;
      out.a[k] = prior.a0;
      std::copy(prior.m0.begin(), prior.m0.end(), out.m.begin() + static_cast<std::ptrdiff_t>(k * D));
      for (std::size_t d = 0; d < D; ++d) out.b[k * D + d] = std::max(prior.b0[d], kPrecisionFloor);
      continue;
    }
    const double beta_k = prior.beta0 + nk;
    out.beta[k] = beta_k;
    out.a[k] = prior.a0 + 0.5 * nk;
    for (std::size_t d = 0; d < D; ++d) {
      const double xb = xbar[k * D + d];
      const double shift = xb - prior.m0[d];
      out.m[k * D + d] = (prior.beta0 * prior.m0[d] + nk * xb) / beta_k;
      const double bkd =
          prior.b0[d] + 0.5 * (scatter[k * D + d] + prior.beta0 * nk * shift * shift / beta_k);
      out.b[k * D + d] = std::max(bkd, kPrecisionFloor);
    }
  }
  out.mass = std::move(mass);
  return out;
}

double elbo(const DpgmmModel& model, const Responsibilities& phi, const PointMatrix& pm,
            const ExecPolicy& exec) {
  require_dim(model, pm);
  const std::size_t N = pm.n_points(), T = model.truncation, D = model.dim;
  if (phi.n_points() != N || phi.components() != T)
    throw Error(Errc::LengthMismatch, "responsibilities shape vs model/points");
  const ScoreTerms st = score_terms(model);
  const auto& kt = kernels::table_for(exec.isa);
  const auto chunks = detail::make_chunks(N, exec.threads);

  std::vector<double> partial(chunks.size(), 0.0);
  detail::for_each_chunk(chunks, [&](const detail::Chunk& c) {
    std::vector<double> s(T);
    double acc = 0.0;
    for (std::size_t n = c.begin; n < c.end; ++n) {
      fill_scores(st, model, kt, pm.row(n), s);
      const auto r = phi.row(n);
      for (std::size_t k = 0; k < T; ++k)
        if (r[k] > 0.0) acc += r[k] * (s[k] - std::log(r[k]));
    }
    partial[c.index] = acc;
  });
  double value = 0.0;
  for (double p : partial) value += p;

  for (std::size_t k = 0; k + 1 < T; ++k)
    value -= kl_beta(model.gamma1[k], model.gamma2[k], 1.0, model.alpha);
  const auto& pr = model.prior;
  for (std::size_t k = 0; k < T; ++k)
    for (std::size_t d = 0; d < D; ++d)
      value -= kl_normal_gamma(model.m[k * D + d], model.beta[k], model.a[k], model.b[k * D + d],
                               pr.m0[d], pr.beta0, pr.a0, pr.b0[d]);
  if (!std::isfinite(value)) throw Error(Errc::NonFiniteElbo, "ELBO evaluated to " + std::to_string(value));
  return value;
}

FitResult fit(const PointMatrix& pm, const DpgmmConfig& cfg, const FitObserver& observer) {
  if (pm.n_points() == 0) throw Error(Errc::EmptyPointSet, "cannot fit an empty point set");
  DpgmmModel model = init(pm, cfg);
  const ExecPolicy exec{cfg.threads, cfg.isa.value_or(kernels::detect_isa())};

  FitResult result;
  Responsibilities phi = nearest_mean_responsibilities(model, pm, exec);
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    if (it > 1) phi = update_responsibilities(model, pm, exec);
    StickParams sp = update_sticks(phi, cfg.alpha);
    model.gamma1 = std::move(sp.gamma1);
    model.gamma2 = std::move(sp.gamma2);
    ComponentParams cp = update_components(phi, pm, model.prior, exec);
    model.m = std::move(cp.m);
    model.beta = std::move(cp.beta);
    model.a = std::move(cp.a);
    model.b = std::move(cp.b);
    model.mass = std::move(cp.mass);

    const double value = elbo(model, phi, pm, exec);
    result.elbo_trace.push_back(value);
    if (observer) observer(IterationView{it, model, phi, value});

    if (it > 1) {
      const double prev = result.elbo_trace[it - 2];
      if (std::abs(value - prev) / std::max(1.0, std::abs(prev)) < cfg.tol) {
        result.converged = true;
        break;
      }
    }
  }
  result.iterations = result.elbo_trace.size();
  model.elbo_trace = result.elbo_trace;
  model.converged = result.converged;
  result.effective_components = effective_components(model);
  result.model = std::move(model);
  return result;
}

std::vector<double> expected_weights(const DpgmmModel& model) {
  const std::size_t T = model.truncation;
  std::vector<double> pi(T, 0.0);
  double remaining = 1.0;  // prod_{j<k} (1 - E[v_j])
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < T; ++k) {
    const double ev = model.gamma1[k] / (model.gamma1[k] + model.gamma2[k]);
    pi[k] = ev * remaining;
    remaining *= 1.0 - ev;
    total += pi[k];
  }
  pi[T - 1] = std::max(0.0, 1.0 - total);
  return pi;
}

std::size_t effective_components(const DpgmmModel& model, double weights_threshold) {
  const auto pi = expected_weights(model);
  return static_cast<std::size_t>(
      std::count_if(pi.begin(), pi.end(), [&](double w) { return w > weights_threshold; }));
}

std::vector<std::int32_t> relabel_by_mass(const DpgmmModel& model) {
  const std::size_t T = model.truncation;
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> mass = model.mass;
  mass.resize(T, 0.0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return mass[i] > mass[j]; });
  std::vector<std::int32_t> id(T);
  for (std::size_t rank = 0; rank < T; ++rank) id[order[rank]] = static_cast<std::int32_t>(rank);
  return id;
}

std::vector<std::int32_t> predict(const DpgmmModel& model, const PointMatrix& pm,
                                  const ExecPolicy& exec) {
  require_dim(model, pm);
  const std::size_t N = pm.n_points(), T = model.truncation;
  const ScoreTerms st = score_terms(model);
  const auto& kt = kernels::table_for(exec.isa);
  const auto id = relabel_by_mass(model);
  std::vector<std::int32_t> labels(N);
  detail::for_each_chunk(detail::make_chunks(N, exec.threads), [&](const detail::Chunk& c) {
    std::vector<double> s(T);
    for (std::size_t n = c.begin; n < c.end; ++n) {
      fill_scores(st, model, kt, pm.row(n), s);
      // strict > keeps the lowest index on ties
      std::size_t best = 0;
      for (std::size_t k = 1; k < T; ++k)
        if (s[k] > s[best]) best = k;
      labels[n] = id[best];
    }
  });
  return labels;
}

std::vector<double> weights_by_cluster_id(const DpgmmModel& model) {
  const auto pi = expected_weights(model);
  const auto id = relabel_by_mass(model);
  std::vector<double> out(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) out[static_cast<std::size_t>(id[k])] = pi[k];
  return out;
}

}  // namespace dpviz
