#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spkde/matrix.hpp"

namespace spkde {

enum class KernelFamily { Gaussian, Cauchy };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Per-family capabilities. Every family has to provide a closed-form Gram
/// entry before it can be used by the QP; families without one are rejected
/// by gram_matrix.
struct KernelTraits {
    bool closed_form_gram;
    /// G_ij = k_{gram_scale * sigma}(X_i, X_j) when closed_form_gram is set.
    double gram_scale;
};

KernelTraits kernel_traits(KernelFamily family);

/// Radial smoothing kernel k_sigma(x, x') = sigma^-d q(|x - x'| / sigma).
class KernelSpec {
public:
    KernelSpec(KernelFamily family, std::size_t dim, double bandwidth);

    KernelFamily family() const noexcept { return family_; }
    std::size_t dim() const noexcept { return dim_; }
    double bandwidth() const noexcept { return bandwidth_; }

    /// Value of the kernel at zero distance (its mode).
    double peak() const noexcept { return norm_; }

    /// The kernel whose values are the L2 inner products of two copies of this one.
    KernelSpec gram_kernel() const;

    KernelSpec with_bandwidth(double bandwidth) const { return {family_, dim_, bandwidth}; }

    /// Kernel values for a vector of squared distances; +inf maps to 0.
    void from_sq_dist(std::span<const double> sq, std::span<double> out) const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

private:
    KernelFamily family_;
    std::size_t dim_;
    double bandwidth_;
    double norm_;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Closed-form L2 Gram matrix G_ij = <k(., X_i), k(., X_j)>; upper triangle
/// computed and mirrored so the result is exactly symmetric.
Matrix gram_matrix(const Matrix& points, const KernelSpec& spec);

/// sum_i a_i k_sigma(., X_i) with a on the probability simplex.
class WeightedDensityEstimate {
public:
    WeightedDensityEstimate(Matrix points, std::vector<double> weights, KernelSpec kernel);

    /// Classic KDE: uniform weights 1/n.
    static WeightedDensityEstimate uniform(Matrix points, KernelSpec kernel);

    const Matrix& points() const noexcept { return points_; }
    std::span<const double> weights() const noexcept { return weights_; }
    const KernelSpec& kernel() const noexcept { return kernel_; }
    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dim() const noexcept { return points_.cols(); }

    double eval(std::span<const double> query) const;
    std::vector<double> eval(const Matrix& queries) const;

    /// i.i.d. draws: component i with probability a_i, then a kernel-shaped
    /// perturbation around X_i.
    Matrix sample(std::size_t m, std::uint64_t seed) const;

private:
    Matrix points_;
    Matrix axis_major_;
    std::vector<double> weights_;
    KernelSpec kernel_;
};

std::vector<double> estimate_eval(const WeightedDensityEstimate& est, const Matrix& queries);
Matrix estimate_sample(const WeightedDensityEstimate& est, std::size_t m, std::uint64_t seed);

/// Checks the simplex invariant (entries >= 0, sum within tol of 1).
bool on_simplex(std::span<const double> weights, double tol = 1e-12);

}  // namespace spkde
