#pragma once

// Data-parallel inner loops used by the kernel, solver and evaluation code.
// Every routine has a scalar reference version; vector variants are selected
// once at startup from the CPU feature set and must agree with the reference
// to within a few ulps per element.

#include <cstddef>
#include <string_view>

namespace spkde::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct Ops {
    Isa isa;

    /// sum_i a[i] * b[i], accumulated in four interleaved lanes then reduced
    /// in a fixed order.
    double (*dot)(const double* a, const double* b, std::size_t n);

    /// out[i] = sum_j (cols[j * n + i] - q[j])^2 for an axis-major point block.
    void (*sq_dist)(const double* cols, std::size_t n, std::size_t dim, const double* q,
                    double* out);

    /// out[i] = norm * exp(neg_scale * sq[i]); neg_scale <= 0, sq may hold +inf.
    void (*gaussian)(const double* sq, std::size_t n, double neg_scale, double norm, double* out);

    /// out[i] = norm * (1 + inv_s2 * sq[i])^(-(dim + 1) / 2); sq may hold +inf.
    void (*cauchy)(const double* sq, std::size_t n, double inv_s2, unsigned dim, double norm,
                   double* out);

    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const Ops& scalar_ops() noexcept;

/// nullptr when the binary was built without AVX2 support or the CPU lacks AVX2+FMA.
const Ops* avx2_ops() noexcept;

/// The table used by the library. Chosen on first use: the best ISA the CPU
/// supports, unless SPKDE_SIMD=scalar is set in the environment.
const Ops& active() noexcept;

/// Overrides the active table (tests and benchmarking). Returns false when the
/// requested ISA is unavailable; the active table is then left unchanged.
bool set_active(Isa isa) noexcept;

}  // namespace spkde::simd
