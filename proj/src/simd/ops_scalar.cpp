#include <cmath>

#include "spkde/simd/ops.hpp"
#include "tables.hpp"

namespace spkde::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lane[0] += a[i] * b[i];
        lane[1] += a[i + 1] * b[i + 1];
        lane[2] += a[i + 2] * b[i + 2];
        lane[3] += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + tail;
}

void sq_dist_scalar(const double* cols, std::size_t n, std::size_t dim, const double* q,
                    double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double* axis = cols + j * n;
        const double qj = q[j];
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = axis[i] - qj;
            out[i] += diff * diff;
        }
    }
}

void gaussian_scalar(const double* sq, std::size_t n, double neg_scale, double norm,
                     double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = norm * std::exp(neg_scale * sq[i]);
}

void cauchy_scalar(const double* sq, std::size_t n, double inv_s2, unsigned dim, double norm,
                   double* out) {
    const double power = -0.5 * (static_cast<double>(dim) + 1.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = norm * std::pow(1.0 + inv_s2 * sq[i], power);
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr Ops kScalar{Isa::Scalar, dot_scalar, sq_dist_scalar, gaussian_scalar, cauchy_scalar,
                      axpy_scalar};

}  // namespace

const Ops& scalar_table() noexcept { return kScalar; }

}  // namespace spkde::simd::detail
