#include "spkde/spkde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spkde/error.hpp"
#include "spkde/simd/ops.hpp"
#include "spkde/simplex.hpp"

namespace spkde {
namespace {

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
    const auto& ops = simd::active();
    const std::size_t n = m.cols();
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = ops.dot(m.row(i).data(), x.data(), n);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return simd::active().dot(a.data(), b.data(), a.size());
}

double objective_from(std::span<const double> a, std::span<const double> ga,
                      std::span<const double> b) {
    return dot(a, ga) - 2.0 * dot(b, a);
}

double kkt_from(std::span<const double> a, std::span<const double> ga,
                std::span<const double> b) {
    double worst = -std::numeric_limits<double>::infinity();
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = b[i] - ga[i];
        worst = std::max(worst, r);
        mean += a[i] * r;
    }
    return std::max(worst - mean, 0.0);
}

}  // namespace

double QpProblem::objective(std::span<const double> a) const {
    if (a.size() != size()) throw ArgumentError("objective: weight vector has wrong length");
    std::vector<double> ga(size());
    matvec(gram, a, ga);
    return objective_from(a, ga, linear);
}

QpProblem build_qp(const Matrix& points, const KernelSpec& spec, double beta) {
    if (!(beta >= 1.0) || !std::isfinite(beta)) {
        throw ArgumentError("build_qp: beta must be a finite value >= 1");
    }
    QpProblem qp;
    qp.gram = gram_matrix(points, spec);
    qp.beta = beta;
    const std::size_t n = points.rows();
    const double scale = beta / static_cast<double>(n);
    qp.linear.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (double g : qp.gram.row(i)) row_sum += g;
        qp.linear[i] = row_sum * scale;
    }
    return qp;
}

double power_iteration_lambda_max(const Matrix& gram, std::size_t steps) {
    const std::size_t n = gram.rows();
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> w(n);
    double lambda = 0.0;
    for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) {
        matvec(gram, v, w);
        lambda = std::sqrt(dot(w, w));
        if (!(lambda > 0.0)) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / lambda;
    }
    return lambda;
}

double kkt_residual(const QpProblem& problem, std::span<const double> a) {
    std::vector<double> ga(problem.size());
    matvec(problem.gram, a, ga);
    return kkt_from(a, ga, problem.linear);
}

namespace {

// Projected gradient iterations. With StepRule::Fixed the gradient is taken
// at the current iterate; with StepRule::Accelerated at an extrapolated point
// y, keeping the better of the projected point and the current iterate.
class PgdSolver {
public:
    PgdSolver(const QpProblem& problem, const SolverOptions& options, std::vector<double> start)
        : problem_(problem), options_(options), n_(problem.size()), x_(std::move(start)),
          gx_(n_), y_(n_), gy_(n_), z_(n_), gz_(n_) {
        lambda_ = power_iteration_lambda_max(problem.gram, options.power_iterations);
        if (!(lambda_ > 0.0)) throw NumericError("solve_pgd: Gram matrix has no positive spectrum");
        eta_ = 1.0 / (2.0 * lambda_);
        report_.step_size = eta_;
        matvec(problem.gram, x_, gx_);
        fx_ = objective_from(x_, gx_, b());
        report_.objective_trace.push_back(fx_);
        y_ = x_;
        gy_ = gx_;
    }

    SolveReport run() {
        const bool accelerated = options_.step_rule == StepRule::Accelerated;
        double momentum_t = 1.0;
        std::size_t quiet = 0;
        for (std::size_t it = 1; it <= options_.max_iter; ++it) {
            for (std::size_t i = 0; i < n_; ++i) z_[i] = y_[i] - eta_ * 2.0 * (gy_[i] - b()[i]);
            project_simplex_inplace(z_, scratch_);
            matvec(problem_.gram, z_, gz_);
            check_curvature();
            const double fz = objective_from(z_, gz_, b());
            // f(z) - f(x) = (z - x)^T (G z + G x - 2 b). Near the optimum the
            // decrease is far below the rounding of f itself, so it is formed
            // from the step directly rather than by subtracting objectives.
            double change = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                change += (z_[i] - x_[i]) * (gz_[i] + gx_[i] - 2.0 * b()[i]);
            }

            const bool at_iterate = !accelerated || y_is_x_;
            const double slack = 1e-12 * std::max(1.0, std::abs(fx_));
            if (at_iterate && change > slack) {
                throw NumericError("solve_pgd: objective increased at iteration " +
                                   std::to_string(it) + "; Gram matrix is not PSD");
            }

            const bool improved = change <= 0.0 || at_iterate;
            double displacement = 0.0;
            double rel_decrease = 0.0;
            if (improved) {
                for (std::size_t i = 0; i < n_; ++i) {
                    displacement = std::max(displacement, std::abs(z_[i] - x_[i]));
                }
                rel_decrease = -change / std::max(std::abs(fx_), 1e-300);
            }

            if (accelerated) {
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
                if (improved) {
                    // y = z + ((t - 1) / t_next) (z - x)
                    const double c = (momentum_t - 1.0) / t_next;
                    for (std::size_t i = 0; i < n_; ++i) {
                        y_[i] = z_[i] + c * (z_[i] - x_[i]);
                        gy_[i] = gz_[i] + c * (gz_[i] - gx_[i]);
                    }
                    y_is_x_ = c == 0.0;
                    momentum_t = t_next;
                } else {
                    // Restart: drop the momentum and step from the iterate.
                    y_ = x_;
                    gy_ = gx_;
                    y_is_x_ = true;
                    momentum_t = 1.0;
                }
            }
            if (improved) {
                x_.swap(z_);
                gx_.swap(gz_);
                fx_ = fz;
            }
            if (!accelerated) {
                y_ = x_;
                gy_ = gx_;
            }
            report_.objective_trace.push_back(fx_);
            report_.iterations = it;

            if (it % 64 == 0) {
                matvec(problem_.gram, x_, gx_);
                if (y_is_x_) gy_ = gx_; else matvec(problem_.gram, y_, gy_);
            }
            quiet = rel_decrease < options_.tol ? quiet + 1 : 0;
            const bool stalled = quiet >= options_.patience || displacement < options_.tol * eta_;
            if (stalled && kkt_from(x_, gx_, b()) <= 10.0 * options_.tol) {
                report_.converged = true;
                break;
            }
        }
        matvec(problem_.gram, x_, gx_);
        report_.kkt_residual = kkt_from(x_, gx_, b());
        report_.weights = std::move(x_);
        return std::move(report_);
    }

private:
    const std::vector<double>& b() const { return problem_.linear; }

    void check_curvature() const {
        double step_sq = 0.0;
        double curvature = 0.0;
        double g_scale = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double d = z_[i] - y_[i];
            step_sq += d * d;
            curvature += d * (gz_[i] - gy_[i]);
            g_scale = std::max({g_scale, std::abs(gz_[i]), std::abs(gy_[i])});
        }
        // G y is carried along by extrapolation between exact refreshes, so
        // tiny steps need an absolute allowance for its rounding drift.
        const double roundoff = 1e-13 * g_scale * std::sqrt(static_cast<double>(n_) * step_sq);
        if (curvature < -1e-9 * lambda_ * step_sq - roundoff) {
            throw NumericError("solve_pgd: negative curvature along a step; Gram matrix is not PSD");
        }
    }

    const QpProblem& problem_;
    SolverOptions options_;
    std::size_t n_;
    std::vector<double> x_, gx_, y_, gy_, z_, gz_, scratch_;
    double lambda_ = 0.0;
    double eta_ = 0.0;
    double fx_ = 0.0;
    bool y_is_x_ = true;
    SolveReport report_;
};

}  // namespace

SolveReport solve_pgd(const QpProblem& problem, const SolverOptions& options,
                      std::optional<std::span<const double>> initial) {
    const std::size_t n = problem.size();
    if (n == 0 || problem.gram.rows() != n || problem.gram.cols() != n) {
        throw ArgumentError("solve_pgd: inconsistent problem dimensions");
    }
    if (!(options.tol > 0.0)) throw ArgumentError("solve_pgd: tol must be positive");
    if (options.max_iter < 1) throw ArgumentError("solve_pgd: max_iter must be >= 1");

    std::vector<double> start(n, 1.0 / static_cast<double>(n));
    if (initial) {
        if (initial->size() != n || !on_simplex(*initial)) {
            throw ArgumentError("solve_pgd: initial point must lie on the simplex");
        }
        start.assign(initial->begin(), initial->end());
    }
    return PgdSolver(problem, options, std::move(start)).run();
}

SpkdeFit fit_spkde(const Matrix& points, const KernelSpec& spec, double beta,
                   const SolverOptions& options) {
    if (!(beta >= 1.0) || !std::isfinite(beta)) {
        throw ArgumentError("fit_spkde: beta must be a finite value >= 1");
    }
    const QpProblem qp = build_qp(points, spec, beta);
    SolveReport report = solve_qp(qp, options);
    WeightedDensityEstimate est(points, report.weights, spec);
    return {std::move(est), std::move(report)};
}

WeightedDensityEstimate fit_kde(const Matrix& points, const KernelSpec& spec) {
    return WeightedDensityEstimate::uniform(points, spec);
}

}  // namespace spkde
