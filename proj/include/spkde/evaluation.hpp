#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spkde/contamination.hpp"
#include "spkde/io.hpp"
#include "spkde/kernels.hpp"
#include "spkde/spkde.hpp"

namespace spkde {

/// Densities below this floor are clamped before taking logs.
inline constexpr double kDensityFloor = 1e-300;

/// `count` log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);
/// 30 log-spaced bandwidths on [0.01, 3].
std::vector<double> default_sigma_grid();

struct LoocvResult {
    double sigma = 0.0;
    /// Sum of leave-one-out log-likelihoods, aligned with the grid (-inf on underflow).
    std::vector<double> scores;
    std::vector<double> grid;
};

/// Exhaustive scan: the sigma maximizing sum_i log f_{-i}(X_i), where f_{-i}
/// is the KDE without X_i. Ties go to the smaller sigma.
LoocvResult loocv_scan(const Matrix& points, std::span<const double> sigma_grid,
                       KernelFamily family = KernelFamily::Gaussian);
double loocv_bandwidth(const Matrix& points, std::span<const double> sigma_grid,
                       KernelFamily family = KernelFamily::Gaussian);

enum class KlDirection { FhatToF0, F0ToFhat };
std::string_view to_string(KlDirection direction);

struct KlEstimate {
    double value = 0.0;
    KlDirection direction = KlDirection::FhatToF0;
    std::size_t n_eval = 0;
    /// Number of density values raised to kDensityFloor before the log.
    std::size_t clamped = 0;
    /// Bandwidth of the reference KDE (FhatToF0 only).
    double reference_sigma = 0.0;
};

/// Gaussian KDE of the test points with its own LOOCV bandwidth.
WeightedDensityEstimate reference_density(const Matrix& test_points,
                                          std::span<const double> sigma_grid);

/// mean log(fhat(x') / f0(x')) over n' = 2 n draws x' from fhat, with f0
/// the reference KDE built from the test points.
KlEstimate kl_fhat_to_f0(const WeightedDensityEstimate& fhat, const Matrix& test_points,
                         std::uint64_t seed, std::span<const double> sigma_grid);
KlEstimate kl_fhat_to_f0(const WeightedDensityEstimate& fhat, const Matrix& test_points,
                         std::uint64_t seed);
/// Same estimate against an already built reference.
KlEstimate kl_fhat_to_f0(const WeightedDensityEstimate& fhat,
                         const WeightedDensityEstimate& reference, std::uint64_t seed);

/// Cross-entropy term -mean log fhat(x'') over the test points (the
/// divergence up to an additive constant).
KlEstimate kl_f0_to_fhat(const WeightedDensityEstimate& fhat, const Matrix& test_points);

struct WilcoxonResult {
    /// Rank sum where a_i > b_i (midranks, so possibly a half-integer).
    double r1 = 0.0;
    double r2 = 0.0;
    double p_value = 1.0;
    std::size_t n_effective = 0;
    /// False when the normal approximation was used (n_effective > 25).
    bool exact = true;
};

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

enum class Method { Kde, Spkde, RejKde };
std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct MetricSummary {
    std::vector<double> values;
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator, 0 for a single value).
    double std = 0.0;
};
MetricSummary summarize(std::vector<double> values);

struct MethodResult {
    /// Metric name -> per-seed values and their summary.
    std::map<std::string, MetricSummary> metrics;
    std::size_t clamped = 0;
    std::size_t not_converged = 0;
};

struct EpsResult {
    double eps = 0.0;
    bool available = true;
    std::string note;
    std::size_t n_train = 0;
    std::size_t n_contaminants = 0;
    std::size_t n_test = 0;
    /// Selected bandwidth per seed.
    std::vector<double> sigmas;
    std::map<std::string, MethodResult> methods;
};

struct DatasetResult {
    std::string dataset;
    std::vector<EpsResult> eps;
};

struct ExperimentReport {
    std::vector<DatasetResult> datasets;

    /// dataset -> eps -> method -> metric -> {mean, std, values}, sorted keys.
    std::string to_json() const;
    /// Columns dataset,eps,method,metric,mean,std,n_seeds.
    void write_csv(std::ostream& out) const;
};

/// Reads the flat CSV back; per-seed values are not stored there, so only
/// means and standard deviations are filled in.
ExperimentReport read_report_csv(std::istream& in, std::string_view source = "<input>");

struct BenchmarkConfig {
    std::vector<double> eps_list{0.0};
    std::vector<Method> methods{Method::Kde, Method::Spkde, Method::RejKde};
    std::size_t n_seeds = 1;
    std::uint64_t master_seed = 0;
    KernelFamily family = KernelFamily::Gaussian;
    /// Fixed bandwidth; LOOCV over sigma_grid on the training data when unset.
    std::optional<double> sigma;
    std::vector<double> sigma_grid = default_sigma_grid();
    /// Robustness scale for SPKDE; unset means 2 for datasets and
    /// 1 / (1 - eps) for synthetic scenarios.
    std::optional<double> beta;
    double reject_fraction = 0.1;
    SolverOptions solver;
};

/// One cell per (eps, seed): label-0 rows are shuffled and split in half into
/// training and test; round(eps / (1 - eps) n0) label-1 rows are added to the
/// training half. Features are scaled to the unit cube first. Both KL metrics
/// are reported per method.
DatasetResult benchmark_run(const Dataset& dataset, std::string_view name,
                            const BenchmarkConfig& config);

/// Synthetic counterpart: per seed, spec.n contaminated training draws and
/// spec.n clean target draws for testing. Adds grid-L1 and grid-L2 errors to
/// the tabulated target. The scenario's own eps is replaced by each entry of
/// eps_list.
DatasetResult synthetic_run(const ContaminationSpec& spec, const BenchmarkConfig& config);

/// Per-dataset means of `metric` for two methods, across a set of reports,
/// compared with the signed-rank test; one row per eps.
struct WilcoxonRow {
    double eps = 0.0;
    WilcoxonResult result;
};
std::vector<WilcoxonRow> compare_methods(const std::vector<DatasetResult>& datasets,
                                         std::string_view method_a, std::string_view method_b,
                                         std::string_view metric);
/// Table layout: eps,R1,R2,p,n_effective,exact.
void write_wilcoxon_csv(std::ostream& out, std::span<const WilcoxonRow> rows);

}  // namespace spkde
