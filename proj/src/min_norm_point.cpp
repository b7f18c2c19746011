// Wolfe's minimum-norm-point algorithm for
//   min_{a in simplex} a^T G a - 2 b^T a,
// i.e. the point of the hull of {k(., X_i) - beta fbar} nearest the origin.
// Inner products between hull vertices only enter through G and b, so the
// constant ||beta fbar||^2 never has to be formed.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spkde/error.hpp"
#include "spkde/simd/ops.hpp"
#include "spkde/simplex.hpp"
#include "spkde/spkde.hpp"

namespace spkde {
namespace {

struct Corral {
    std::vector<std::size_t> index;
    std::vector<double> weight;
};

// G a for a supported on the corral: sum_j w_j G_{., j} (G symmetric, so rows).
void corral_matvec(const Matrix& gram, const Corral& c, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const auto& ops = simd::active();
    for (std::size_t k = 0; k < c.index.size(); ++k) {
        ops.axpy(c.weight[k], gram.row(c.index[k]).data(), out.data(), out.size());
    }
}

double corral_objective(const Corral& c, const std::vector<double>& ga,
                        const std::vector<double>& b) {
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t k = 0; k < c.index.size(); ++k) {
        quad += c.weight[k] * ga[c.index[k]];
        lin += c.weight[k] * b[c.index[k]];
    }
    return quad - 2.0 * lin;
}

// Minimizer of v^T G_SS v - 2 b_S^T v over the affine hull {sum v = 1}:
// [G_SS 1; 1^T 0] [v; nu] = [b_S; 1]. Minimum-norm solution when singular.
std::vector<double> affine_minimizer(const QpProblem& qp, const std::vector<std::size_t>& s) {
    const auto k = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (Eigen::Index p = 0; p < k; ++p) {
        for (Eigen::Index q = 0; q < k; ++q) {
            kkt(p, q) = qp.gram(s[static_cast<std::size_t>(p)], s[static_cast<std::size_t>(q)]);
        }
        kkt(p, k) = 1.0;
        kkt(k, p) = 1.0;
        rhs(p) = qp.linear[s[static_cast<std::size_t>(p)]];
    }
    rhs(k) = 1.0;
    const auto cod = kkt.completeOrthogonalDecomposition();
    Eigen::VectorXd sol = cod.solve(rhs);
    // One step of iterative refinement: G_SS is often badly conditioned.
    sol += cod.solve(rhs - kkt * sol);
    return {sol.data(), sol.data() + k};
}

}  // namespace

SolveReport solve_min_norm_point(const QpProblem& problem, const SolverOptions& options) {
    const std::size_t n = problem.size();
    if (n == 0 || problem.gram.rows() != n || problem.gram.cols() != n) {
        throw ArgumentError("solve_min_norm_point: inconsistent problem dimensions");
    }
    if (!(options.tol > 0.0)) throw ArgumentError("solve_min_norm_point: tol must be positive");
    if (options.max_iter < 1) throw ArgumentError("solve_min_norm_point: max_iter must be >= 1");
    const auto& b = problem.linear;

    // The uniform point is the shared starting point of both solvers. When it
    // already meets the tolerance it is returned as is: with an ill-conditioned
    // Gram matrix the corral could settle on a different, equally optimal point.
    {
        std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
        const double residual = kkt_residual(problem, uniform);
        if (residual <= options.tol) {
            SolveReport report;
            report.objective_trace.push_back(problem.objective(uniform));
            report.kkt_residual = residual;
            report.converged = true;
            report.weights = std::move(uniform);
            return report;
        }
    }

    // Best single vertex: objective at e_i is G_ii - 2 b_i.
    std::size_t start = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (problem.gram(i, i) - 2.0 * b[i] < problem.gram(start, start) - 2.0 * b[start]) start = i;
    }
    Corral corral{{start}, {1.0}};

    SolveReport report;
    std::vector<double> ga(n);
    corral_matvec(problem.gram, corral, ga);
    double obj = corral_objective(corral, ga, b);
    report.objective_trace.push_back(obj);

    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        // Largest violation of <e_i - a, beta fbar - f_a> <= 0.
        double mean = 0.0;
        for (std::size_t k = 0; k < corral.index.size(); ++k) {
            mean += corral.weight[k] * (b[corral.index[k]] - ga[corral.index[k]]);
        }
        std::size_t entering = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double r = b[i] - ga[i];
            if (r > best) {
                best = r;
                entering = i;
            }
        }
        gap = std::max(best - mean, 0.0);
        if (gap <= options.tol) {
            report.converged = true;
            break;
        }
        if (std::find(corral.index.begin(), corral.index.end(), entering) != corral.index.end()) {
            break;  // no descent vertex left at working precision
        }
        corral.index.push_back(entering);
        corral.weight.push_back(0.0);
        bool stalled = false;

        for (std::size_t minor = 0; minor <= corral.index.size() + 1; ++minor) {
            const std::vector<double> v = affine_minimizer(problem, corral.index);
            double theta = 1.0;
            std::size_t leaving = corral.index.size();
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (v[k] <= 0.0) {
                    const double w = corral.weight[k];
                    const double step = w / (w - v[k]);
                    if (step < theta || leaving == corral.index.size()) {
                        theta = std::min(theta, step);
                        leaving = k;
                    }
                }
            }
            if (leaving == corral.index.size()) {
                corral.weight = v;
                break;
            }
            if (theta == 0.0 && corral.index[leaving] == entering) {
                stalled = true;
                break;
            }
            Corral kept;
            for (std::size_t k = 0; k < v.size(); ++k) {
                const double w = corral.weight[k] + theta * (v[k] - corral.weight[k]);
                if (k != leaving && w > 0.0) {
                    kept.index.push_back(corral.index[k]);
                    kept.weight.push_back(w);
                }
            }
            if (kept.index.empty()) throw InternalError("min-norm-point corral emptied");
            corral = std::move(kept);
        }

        if (stalled) {
            corral.index.pop_back();
            corral.weight.pop_back();
            break;
        }

        double total = 0.0;
        for (double w : corral.weight) total += w;
        for (double& w : corral.weight) w /= total;

        corral_matvec(problem.gram, corral, ga);
        const double next = corral_objective(corral, ga, b);
        const double slack = 1e-12 * std::max(1.0, std::abs(obj));
        if (next > obj + slack) {
            throw NumericError("solve_min_norm_point: objective increased at iteration " +
                               std::to_string(it) + "; Gram matrix is not PSD");
        }
        obj = next;
        report.objective_trace.push_back(obj);
        report.iterations = it;
    }

    std::vector<double> a(n, 0.0);
    for (std::size_t k = 0; k < corral.index.size(); ++k) a[corral.index[k]] = corral.weight[k];
    std::vector<double> scratch;
    project_simplex_inplace(a, scratch);
    report.kkt_residual = kkt_residual(problem, a);
    // A stop at working precision still counts when the termination bound holds.
    if (!report.converged && report.kkt_residual <= 10.0 * options.tol) report.converged = true;
    report.weights = std::move(a);
    return report;
}

SolveReport solve_qp(const QpProblem& problem, const SolverOptions& options) {
    switch (options.method) {
        case SolverMethod::ProjectedGradient: return solve_pgd(problem, options);
        case SolverMethod::MinNormPoint: return solve_min_norm_point(problem, options);
    }
    throw ArgumentError("solve_qp: unknown solver method");
}

}  // namespace spkde
