#include "spkde/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "spkde/error.hpp"
#include "spkde/simd/ops.hpp"

namespace spkde {

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::Cauchy: return "cauchy";
    }
    throw UnsupportedError("unknown kernel family");
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "gaussian") return KernelFamily::Gaussian;
    if (name == "cauchy") return KernelFamily::Cauchy;
    throw ArgumentError("unknown kernel family '" + std::string(name) +
                        "' (expected gaussian or cauchy)");
}

KernelTraits kernel_traits(KernelFamily family) {
    switch (family) {
        case KernelFamily::Gaussian: return {true, std::numbers::sqrt2};
        case KernelFamily::Cauchy: return {true, 2.0};
    }
    return {false, 0.0};
}

namespace {

double normalizer(KernelFamily family, std::size_t dim, double sigma) {
    const double d = static_cast<double>(dim);
    switch (family) {
        case KernelFamily::Gaussian:
            return std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * d);
        case KernelFamily::Cauchy:
            return std::exp(std::lgamma(0.5 * (d + 1.0)) -
                            0.5 * (d + 1.0) * std::log(std::numbers::pi) - d * std::log(sigma));
    }
    throw UnsupportedError("unknown kernel family");
}

}  // namespace

KernelSpec::KernelSpec(KernelFamily family, std::size_t dim, double bandwidth)
    : family_(family), dim_(dim), bandwidth_(bandwidth) {
    if (dim == 0) throw ArgumentError("KernelSpec: dimension must be >= 1");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw ArgumentError("KernelSpec: bandwidth must be positive and finite");
    }
    norm_ = normalizer(family, dim, bandwidth);
}

KernelSpec KernelSpec::gram_kernel() const {
    const KernelTraits traits = kernel_traits(family_);
    if (!traits.closed_form_gram) {
        throw UnsupportedError("kernel family '" + std::string(to_string(family_)) +
                               "' has no closed-form Gram entry");
    }
    return {family_, dim_, traits.gram_scale * bandwidth_};
}

void KernelSpec::from_sq_dist(std::span<const double> sq, std::span<double> out) const {
    const auto& ops = simd::active();
    const double inv_s2 = 1.0 / (bandwidth_ * bandwidth_);
    switch (family_) {
        case KernelFamily::Gaussian:
            ops.gaussian(sq.data(), sq.size(), -0.5 * inv_s2, norm_, out.data());
            return;
        case KernelFamily::Cauchy:
            ops.cauchy(sq.data(), sq.size(), inv_s2, static_cast<unsigned>(dim_), norm_,
                       out.data());
            return;
    }
    throw UnsupportedError("unknown kernel family");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != spec.dim() || y.size() != spec.dim()) {
        throw ArgumentError("kernel_eval: point dimension does not match kernel dimension");
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - y[j];
        sq += diff * diff;
    }
    const double s2 = spec.bandwidth() * spec.bandwidth();
    const double d = static_cast<double>(spec.dim());
    switch (spec.family()) {
        case KernelFamily::Gaussian: return spec.peak() * std::exp(-0.5 * sq / s2);
        case KernelFamily::Cauchy: return spec.peak() * std::pow(1.0 + sq / s2, -0.5 * (d + 1.0));
    }
    throw UnsupportedError("unknown kernel family");
}

Matrix gram_matrix(const Matrix& points, const KernelSpec& spec) {
    const std::size_t n = points.rows();
    if (n == 0) throw ArgumentError("gram_matrix: need at least one point");
    if (points.cols() != spec.dim()) {
        throw ArgumentError("gram_matrix: point dimension does not match kernel dimension");
    }
    const KernelSpec inner = spec.gram_kernel();
    const Matrix cols = points.transposed();
    const auto& ops = simd::active();

    Matrix gram(n, n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        ops.sq_dist(cols.data().data(), n, spec.dim(), points.row(i).data(), sq.data());
        inner.from_sq_dist(sq, gram.row(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
    }
    return gram;
}

bool on_simplex(std::span<const double> weights, double tol) {
    if (weights.empty()) return false;
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) return false;
        total += w;
    }
    return std::abs(total - 1.0) <= tol;
}

WeightedDensityEstimate::WeightedDensityEstimate(Matrix points, std::vector<double> weights,
                                                 KernelSpec kernel)
    : points_(std::move(points)), weights_(std::move(weights)), kernel_(kernel) {
    if (points_.rows() == 0) throw ArgumentError("density estimate needs at least one point");
    if (points_.cols() != kernel_.dim()) {
        throw ArgumentError("density estimate: point dimension does not match kernel dimension");
    }
    if (weights_.size() != points_.rows()) {
        throw ArgumentError("density estimate: one weight per point required");
    }
    if (!on_simplex(weights_)) {
        throw ArgumentError("density estimate: weights must be nonnegative and sum to 1");
    }
    axis_major_ = points_.transposed();
}

WeightedDensityEstimate WeightedDensityEstimate::uniform(Matrix points, KernelSpec kernel) {
    const std::size_t n = points.rows();
    if (n == 0) throw ArgumentError("density estimate needs at least one point");
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    return {std::move(points), std::move(w), kernel};
}

double WeightedDensityEstimate::eval(std::span<const double> query) const {
    if (query.size() != dim()) {
        throw ArgumentError("estimate_eval: query dimension does not match estimate dimension");
    }
    const auto& ops = simd::active();
    std::vector<double> buf(size());
    ops.sq_dist(axis_major_.data().data(), size(), dim(), query.data(), buf.data());
    kernel_.from_sq_dist(buf, buf);
    return ops.dot(weights_.data(), buf.data(), size());
}

std::vector<double> WeightedDensityEstimate::eval(const Matrix& queries) const {
    if (queries.cols() != dim() && queries.rows() > 0) {
        throw ArgumentError("estimate_eval: query dimension does not match estimate dimension");
    }
    const auto& ops = simd::active();
    std::vector<double> out(queries.rows());
    std::vector<double> buf(size());
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        ops.sq_dist(axis_major_.data().data(), size(), dim(), queries.row(q).data(), buf.data());
        kernel_.from_sq_dist(buf, buf);
        out[q] = ops.dot(weights_.data(), buf.data(), size());
    }
    return out;
}

Matrix WeightedDensityEstimate::sample(std::size_t m, std::uint64_t seed) const {
    const std::size_t n = size();
    const std::size_t d = dim();
    std::vector<double> cumulative(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += weights_[i];
        cumulative[i] = running;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pick(0.0, running);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = kernel_.bandwidth();

    Matrix out(m, d);
    for (std::size_t s = 0; s < m; ++s) {
        const double u = pick(rng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t comp = static_cast<std::size_t>(it - cumulative.begin());
        if (comp >= n) comp = n - 1;
        // Never land on a zero-weight component through a flat cumulative step.
        while (weights_[comp] == 0.0 && comp + 1 < n) ++comp;

        double scale = sigma;
        if (kernel_.family() == KernelFamily::Cauchy) {
            // Multivariate Cauchy = Gaussian / sqrt(chi^2_1).
            double g = 0.0;
            while (g == 0.0) g = normal(rng);
            scale = sigma / std::abs(g);
        }
        for (std::size_t j = 0; j < d; ++j) {
            out(s, j) = points_(comp, j) + scale * normal(rng);
        }
    }
    return out;
}

std::vector<double> estimate_eval(const WeightedDensityEstimate& est, const Matrix& queries) {
    return est.eval(queries);
}

Matrix estimate_sample(const WeightedDensityEstimate& est, std::size_t m, std::uint64_t seed) {
    return est.sample(m, seed);
}

}  // namespace spkde
