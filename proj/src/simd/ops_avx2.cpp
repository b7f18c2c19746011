// AVX2 + FMA variants (4 doubles per register). Compiled with -mavx2 -mfma;
// only reached after the runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include <cmath>

#include "spkde/simd/ops.hpp"
#include "tables.hpp"

namespace spkde::simd::detail {
namespace {

constexpr std::size_t kLane = 4;

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    // ((l0 + l1) + (l2 + l3)), matching the scalar reduction order.
    const __m128d pair_lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
    const __m128d pair_hi = _mm_add_sd(hi, _mm_unpackhi_pd(hi, hi));
    return _mm_cvtsd_f64(_mm_add_sd(pair_lo, pair_hi));
}

// exp(x) for x <= 709; results below 2^-1022 flush to zero.
// Cody-Waite reduction x = k ln2 + r, |r| <= ln2/2, then a degree-13 Taylor
// polynomial for e^r (truncation error < 1e-17) and exponent-bit scaling.
inline __m256d exp_pd(__m256d x) {
    const __m256d lower = _mm256_set1_pd(-708.3);
    const __m256d upper = _mm256_set1_pd(709.0);
    const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lower), upper);

    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93147180369123816490e-01), x);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.90821492927058770002e-10), r);

    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    const __m128i k32 = _mm256_cvtpd_epi32(k);
    __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(k32), _mm256_set1_epi64x(1023));
    bits = _mm256_slli_epi64(bits, 52);
    const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, result);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLane <= n; i += kLane) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hsum(acc) + tail;
}

void sq_dist_avx2(const double* cols, std::size_t n, std::size_t dim, const double* q,
                  double* out) {
    std::size_t i = 0;
    for (; i + kLane <= n; i += kLane) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < dim; ++j) {
            const __m256d diff =
                _mm256_sub_pd(_mm256_loadu_pd(cols + j * n + i), _mm256_set1_pd(q[j]));
            acc = _mm256_fmadd_pd(diff, diff, acc);
        }
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double diff = cols[j * n + i] - q[j];
            s += diff * diff;
        }
        out[i] = s;
    }
}

void gaussian_avx2(const double* sq, std::size_t n, double neg_scale, double norm, double* out) {
    const __m256d scale = _mm256_set1_pd(neg_scale);
    const __m256d nv = _mm256_set1_pd(norm);
    std::size_t i = 0;
    for (; i + kLane <= n; i += kLane) {
        const __m256d arg = _mm256_mul_pd(scale, _mm256_loadu_pd(sq + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(nv, exp_pd(arg)));
    }
    for (; i < n; ++i) out[i] = norm * std::exp(neg_scale * sq[i]);
}

void cauchy_avx2(const double* sq, std::size_t n, double inv_s2, unsigned dim, double norm,
                 double* out) {
    // (1+t)^(-(d+1)/2): integer power for odd d, times t^(-1/2) for even d.
    const unsigned whole = (dim + 1) / 2;
    const bool half = (dim % 2) == 0;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d is2 = _mm256_set1_pd(inv_s2);
    const __m256d nv = _mm256_set1_pd(norm);
    std::size_t i = 0;
    for (; i + kLane <= n; i += kLane) {
        const __m256d t = _mm256_fmadd_pd(is2, _mm256_loadu_pd(sq + i), one);
        __m256d denom = half ? _mm256_sqrt_pd(t) : one;
        for (unsigned k = 0; k < whole; ++k) denom = _mm256_mul_pd(denom, t);
        _mm256_storeu_pd(out + i, _mm256_div_pd(nv, denom));
    }
    const double power = -0.5 * (static_cast<double>(dim) + 1.0);
    for (; i < n; ++i) out[i] = norm * std::pow(1.0 + inv_s2 * sq[i], power);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + kLane <= n; i += kLane) {
        _mm256_storeu_pd(y + i,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr Ops kAvx2{Isa::Avx2, dot_avx2, sq_dist_avx2, gaussian_avx2, cauchy_avx2, axpy_avx2};

}  // namespace

const Ops& avx2_table() noexcept { return kAvx2; }

}  // namespace spkde::simd::detail
