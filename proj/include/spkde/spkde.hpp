#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spkde/kernels.hpp"
#include "spkde/matrix.hpp"

namespace spkde {

/// min_{a in simplex} a^T G a - 2 b^T a with b = G 1 (beta / n).
struct QpProblem {
    Matrix gram;
    std::vector<double> linear;
    double beta = 1.0;

    std::size_t size() const noexcept { return linear.size(); }
    double objective(std::span<const double> a) const;
};

enum class StepRule {
    /// a <- P(a - eta grad), eta = 1 / (2 lambda_max(G)).
    Fixed,
    /// Same step, applied at an extrapolated point (monotone FISTA with
    /// function-value restart). The accepted iterate never raises the objective.
    Accelerated,
};

enum class SolverMethod {
    ProjectedGradient,
    /// Wolfe's minimum-norm-point algorithm on the hull of the kernel
    /// functions; terminates when the KKT residual drops below tol.
    MinNormPoint,
};

struct SolverOptions {
    double tol = 1e-10;
    SolverMethod method = SolverMethod::MinNormPoint;
    StepRule step_rule = StepRule::Fixed;
    std::size_t max_iter = 50000;
    std::size_t power_iterations = 100;
    /// Consecutive small-decrease iterations required by the stopping rule.
    std::size_t patience = 5;
};

struct SolveReport {
    std::vector<double> weights;
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
    double step_size = 0.0;

    double objective() const { return objective_trace.back(); }
};

QpProblem build_qp(const Matrix& points, const KernelSpec& spec, double beta);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration from the
/// normalized ones vector.
double power_iteration_lambda_max(const Matrix& gram, std::size_t steps);

/// max_i (b - G a)_i - a^T (b - G a): the largest violation of the
/// variational inequality <e_i - a, beta fbar - f_a> <= 0 over simplex vertices.
double kkt_residual(const QpProblem& problem, std::span<const double> a);

/// Projected gradient descent a <- P(a - eta (2 G a - 2 b)), eta = 1 / (2 lambda_max).
///
/// Stops when the relative objective decrease stays below tol for `patience`
/// consecutive steps or when the step moves no coordinate by more than
/// tol * eta, and in either case only once the KKT residual is at most 10 tol.
/// Throws NumericError if a step exposes negative curvature or raises the
/// objective (G is not PSD).
SolveReport solve_pgd(const QpProblem& problem, const SolverOptions& options = {},
                      std::optional<std::span<const double>> initial = std::nullopt);

/// Exact solve by Wolfe's minimum-norm-point method: grows a corral of
/// vertices, minimizes over its affine hull, and drops vertices whose weight
/// would turn negative. Each major iteration costs O(n |corral|) plus a small
/// dense solve; iterations are counted in major cycles.
/// Reports converged when the gap reaches tol, or when the corral solve stops
/// at working precision with the final KKT residual at most 10 tol.
/// Returns the uniform point after zero iterations when its KKT residual is
/// already at most tol; otherwise the corral starts from the best single vertex.
SolveReport solve_min_norm_point(const QpProblem& problem, const SolverOptions& options = {});

/// Dispatches on options.method.
SolveReport solve_qp(const QpProblem& problem, const SolverOptions& options = {});

struct SpkdeFit {
    WeightedDensityEstimate estimate;
    SolveReport report;
};

/// Scaled projected KDE: the weighted KDE nearest in L2 to beta times the classic KDE.
/// Throws ArgumentError for beta < 1.
SpkdeFit fit_spkde(const Matrix& points, const KernelSpec& spec, double beta,
                   const SolverOptions& options = {});

WeightedDensityEstimate fit_kde(const Matrix& points, const KernelSpec& spec);

}  // namespace spkde
