#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "spkde/kernels.hpp"
#include "spkde/matrix.hpp"

namespace spkde {

/// Deterministic pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

/// A density tabulated at the cell centers of a regular 1-D or 2-D grid.
///
/// `origin` is the lower corner of the grid, cell k on axis j is centered at
/// origin[j] + (k + 0.5) * cell[j]. Values are stored with the last axis
/// varying fastest (flat index i * shape[1] + j in 2-D). Integrals use the
/// midpoint rule.
class GridDensity {
public:
    GridDensity(std::vector<double> origin, std::vector<double> cell, std::vector<std::size_t> shape,
                std::vector<double> values);

    /// Tabulates `f` (called with the cell-center coordinates) on the grid.
    static GridDensity tabulate(std::vector<double> origin, std::vector<double> cell,
                                std::vector<std::size_t> shape,
                                const std::function<double(std::span<const double>)>& f);

    std::size_t dim() const noexcept { return shape_.size(); }
    const std::vector<double>& origin() const noexcept { return origin_; }
    const std::vector<double>& cell() const noexcept { return cell_; }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    double cell_volume() const noexcept;
    double mass() const;
    double max_value() const;

    /// Cell-center coordinates for every cell, one row per cell in storage order.
    Matrix centers() const;

    /// Copy rescaled to unit mass.
    GridDensity normalized() const;

    bool same_grid(const GridDensity& other) const noexcept;

private:
    std::vector<double> origin_;
    std::vector<double> cell_;
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

struct SliceResult {
    double alpha = 0.0;
    GridDensity density;
    /// |mass(density) - 1|
    double mass_error = 0.0;
    std::size_t bisection_steps = 0;
};

/// Mass of max(beta f - alpha, 0).
double sliced_mass(const GridDensity& f, double beta, double alpha);

/// max(beta f - alpha, 0) with alpha chosen by bisection on [0, beta max f]
/// so the result has unit mass within tol. Requires beta > 1 and f
/// normalized to 1e-8; throws NumericError when 200 halvings do not reach tol.
SliceResult slice_transform(const GridDensity& f, double beta, double tol = 1e-10);

/// slice_transform with beta = 1 / (1 - eps); eps = 0 returns the input with alpha = 0.
SliceResult decontaminate(const GridDensity& f_obs, double eps, double tol = 1e-10);

/// (1 - eps) f_tar + eps f_con on a shared grid.
GridDensity mix(const GridDensity& f_tar, const GridDensity& f_con, double eps);

struct AssumptionAWitness {
    bool holds = false;
    /// Mean contaminant level over the target support.
    double level = 0.0;
    /// Flat indices of offending cells: inside the support with
    /// |f_con - level| > tol, or outside with f_con > level + tol.
    std::vector<std::size_t> violations;
};

/// Grid check that f_con is flat on {f_tar > tol} and no higher elsewhere.
AssumptionAWitness check_assumption_a(const GridDensity& f_tar, const GridDensity& f_con,
                                      double tol = 1e-9);

struct GridEstimate {
    GridDensity grid;
    double mass = 0.0;
    /// Set when the grid does not reach 6 bandwidths past the data on every
    /// axis, or when the tabulated mass is below 0.99.
    bool mass_warning = false;
};

/// Tabulates a weighted KDE on a grid (d <= 2). No renormalization unless asked.
GridEstimate grid_from_estimate(const WeightedDensityEstimate& est, std::vector<double> origin,
                                std::vector<std::size_t> shape, double h,
                                bool renormalize = false);

/// (sum |f - g|^p h^d)^(1/p), p in {1, 2}.
double lp_distance(const GridDensity& f, const GridDensity& g, int p);

/// CSV with a `# dim=.. origin=.. cell=.. shape=..` comment line, a header
/// row (`i,value` or `i,j,value`) and one row per cell.
void write_grid_csv(std::ostream& out, const GridDensity& grid);
GridDensity read_grid_csv(std::istream& in);

}  // namespace spkde
