#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spkde/grid.hpp"
#include "spkde/kernels.hpp"
#include "spkde/matrix.hpp"

namespace spkde {

/// Axis-aligned box [lo, hi] in d dimensions.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
    bool contains(std::span<const double> x) const;
};

/// One mixture component with independent axes.
struct GaussianComponent {
    double weight = 1.0;
    std::vector<double> mean;
    std::vector<double> sd;
};

/// A sampler together with its density, so the same object drives both the
/// synthetic draws and the grid ground truth.
class Distribution {
public:
    /// Weighted axis-aligned Gaussian mixture, optionally truncated to a box
    /// (renormalized, sampled by rejection).
    static Distribution gaussian_mixture(std::vector<GaussianComponent> components,
                                         std::optional<Box> truncation = std::nullopt);
    static Distribution uniform_box(Box box);

    std::size_t dim() const noexcept { return dim_; }
    /// Short human-readable description, e.g. "uniform[-2,2]".
    const std::string& name() const noexcept { return name_; }
    double pdf(std::span<const double> x) const;
    /// Cumulative distribution, 1-D only.
    double cdf(double x) const;
    std::vector<double> sample(std::mt19937_64& rng) const;

private:
    enum class Kind { GaussianMixture, Uniform };
    Kind kind_ = Kind::Uniform;
    std::size_t dim_ = 0;
    std::string name_;
    std::vector<GaussianComponent> components_;
    std::optional<Box> box_;
    /// Mixture mass inside the truncation box (1 when untruncated).
    double inside_mass_ = 1.0;
    double box_volume_ = 1.0;
    std::vector<double> cumulative_weights_;
};

struct GridParams {
    std::vector<double> origin;
    std::vector<std::size_t> shape;
    double h = 1e-3;
};

struct ContaminationSpec {
    std::string name;
    Distribution target;
    Distribution contaminant;
    double eps = 0.0;
    std::size_t n = 1;
    std::uint64_t seed = 0;
    /// Companion robustness scale used with this scenario, 1 / (1 - eps).
    double beta = 1.0;
    /// Grid on which the scenario's ground truth is tabulated.
    GridParams grid;

    void validate() const;
};

enum class Source { Target, Contaminant };
std::string_view to_string(Source source);

struct LabeledSample {
    std::vector<double> point;
    Source source = Source::Target;
};

/// Each draw comes from the contaminant with probability eps, otherwise from
/// the target. One RNG stream seeded with spec.seed.
std::vector<LabeledSample> sample_mixture(const ContaminationSpec& spec);

/// Points of a labeled sample as an n x d matrix (labels dropped).
Matrix sample_points(std::span<const LabeledSample> samples);

/// 0.7 N(-0.7, 0.25^2) + 0.3 N(0.9, 0.2^2) on [-2, 2], Uniform[-2, 2]
/// contamination, n = 500, eps = 0.2, beta = 1.25; grid [-4, 4] at h = 1e-3.
ContaminationSpec fig4_experiment_spec();

/// Target Uniform[0, 0.5], contaminant Uniform[0, 1], eps = 0.2 on [0, 1].
/// The observed density is 1.8 on [0, 0.5] and 0.2 on [0.5, 1].
ContaminationSpec piecewise_experiment_spec();

/// Target and contaminant both Uniform[0, 1], eps = 0.5 (beta = 2).
ContaminationSpec uniform01_experiment_spec();

/// Looks up fig4, piecewise or uniform01; throws ArgumentError otherwise.
ContaminationSpec named_scenario(std::string_view name);

/// Per-axis map x' = (x - lo) / (hi - lo). Constant axes map to 0.5 and are
/// flagged degenerate; their inverse returns lo.
struct AffineTransform {
    std::vector<double> lo;
    std::vector<double> span;
    std::vector<bool> degenerate;

    Matrix apply(const Matrix& data) const;
    Matrix inverse(const Matrix& scaled) const;
    bool any_degenerate() const;
};

struct UnitCubeScaling {
    Matrix scaled;
    AffineTransform transform;
};

UnitCubeScaling scale_to_unit_cube(const Matrix& data);

struct RejKdeFit {
    WeightedDensityEstimate estimate;
    /// Indices (into the input) of the dropped points, lowest score first.
    std::vector<std::size_t> rejected;
};

/// Drops the floor(fraction * n) points with the lowest pilot-KDE score
/// (ties broken by index) and refits a uniform-weight KDE with the same kernel.
RejKdeFit fit_rejkde(const Matrix& points, const KernelSpec& spec, double reject_fraction);

struct GridTruth {
    GridDensity f_tar;
    GridDensity f_con;
    GridDensity f_obs;
};

/// Target and contaminant tabulated on the grid, each renormalized on the
/// grid, and their eps-mixture.
GridTruth grid_truth(const ContaminationSpec& spec, const GridParams& grid);
GridTruth grid_truth(const ContaminationSpec& spec);

}  // namespace spkde
