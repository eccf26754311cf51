#pragma once

// Inner-loop arithmetic of the mixture updates.
//
// Every kernel has a scalar reference implementation; vector variants (AVX2+FMA
// on x86-64, NEON on AArch64) are compiled into separate translation units and
// chosen at runtime. Vector variants reassociate sums, so they agree with the
// scalar reference to rounding, not bit-for-bit. A given table is deterministic.

#include <cstddef>
#include <optional>
#include <string_view>

namespace dpviz::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

struct KernelTable {
  Isa isa;
  /// sum_j prec[j] * (x[j] - mean[j])^2
  double (*weighted_sq_dist)(const double* x, const double* mean, const double* prec,
                             std::size_t n);
  /// acc[j] += w * x[j]
  void (*axpy)(double w, const double* x, double* acc, std::size_t n);
  /// acc[j] += w * (x[j] - mean[j])^2
  void (*weighted_sq_dev)(double w, const double* x, const double* mean, double* acc,
                          std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// True when the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Table for `isa`; falls back to scalar when unavailable.
const KernelTable& table_for(Isa isa) noexcept;

/// Best available variant. DPVIZ_KERNELS=scalar|avx2|neon in the environment
/// overrides the choice (unavailable requests fall back to scalar).
Isa detect_isa() noexcept;

namespace detail {
// Defined in the per-ISA translation units; null when not compiled.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;
}  // namespace detail

}  // namespace dpviz::kernels
