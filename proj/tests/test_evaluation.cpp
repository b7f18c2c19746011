#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "spkde/evaluation.hpp"

using namespace spkde;

namespace {

Matrix normal_points(std::size_t n, std::size_t d, double mean, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(mean, 1.0);
    Matrix m(n, d);
    for (double& v : m.data()) v = nd(rng);
    return m;
}

std::vector<std::vector<double>> rows(const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
    return out;
}

/// Label 0: a Gaussian blob; label 1: uniform scatter over a wider box.
Dataset labelled_dataset(std::size_t n0, std::size_t n1, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    Dataset d;
    d.feature_names = {"a", "b"};
    d.features = Matrix(n0 + n1, 2);
    d.labels = std::vector<int>();
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        const bool target = i < n0;
        d.features(i, 0) = target ? nd(rng) : u(rng);
        d.features(i, 1) = target ? 0.5 * nd(rng) : u(rng);
        d.labels->push_back(target ? 0 : 1);
    }
    return d;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("log spaced grids") {
    const auto g = log_spaced(0.01, 3.0, 30);
    CHECK(g.size() == 30);
    CHECK(g.front() == 0.01);
    CHECK(g.back() == 3.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(300.0, 1.0 / 29.0)).epsilon(1e-12));
    }
    CHECK(default_sigma_grid() == g);
    CHECK(log_spaced(2.0, 2.0, 1) == std::vector<double>{2.0});
}

TEST_CASE("LOOCV on a single-value grid") {
    const std::vector<double> grid{0.37};
    CHECK(loocv_bandwidth(normal_points(20, 1, 0.0, 1), grid) == 0.37);
}

TEST_CASE("LOOCV scores match a direct leave-one-out computation") {
    for (std::size_t d : {1u, 2u}) {
        const Matrix pts = normal_points(60, d, 0.0, 10 + d);
        const auto grid = log_spaced(0.05, 2.0, 12);
        const auto scan = loocv_scan(pts, grid);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const double want = oracle::loo_log_likelihood(rows(pts), grid[s]);
            if (std::isinf(want)) {
                CHECK(scan.scores[s] == want);
            } else {
                CHECK(scan.scores[s] == doctest::Approx(want).epsilon(1e-10));
            }
            best = std::max(best, want);
        }
        // The returned bandwidth attains the maximum on a re-scan.
        const auto it = std::find(grid.begin(), grid.end(), scan.sigma);
        REQUIRE(it != grid.end());
        CHECK(oracle::loo_log_likelihood(rows(pts), scan.sigma) == doctest::Approx(best).epsilon(1e-10));
    }
}

TEST_CASE("LOOCV lands near the normal reference rate") {
    const double sigma = loocv_bandwidth(normal_points(500, 1, 0.0, 3), default_sigma_grid());
    const double silverman = 1.06 * std::pow(500.0, -0.2);
    CHECK(sigma > silverman / 2.0);
    CHECK(sigma < silverman * 2.0);
}

TEST_CASE("LOOCV underflow scores minus infinity") {
    const Matrix far = Matrix::column(std::vector<double>{0.0, 10.0, 20.0});
    const std::vector<double> grid{0.01, 0.1, 5.0};
    const auto scan = loocv_scan(far, grid);
    CHECK(scan.scores[0] == -std::numeric_limits<double>::infinity());
    CHECK(oracle::loo_log_likelihood(rows(far), 0.01) == -std::numeric_limits<double>::infinity());
    CHECK(std::isfinite(scan.scores[2]));
    CHECK(scan.sigma == 5.0);
}

TEST_CASE("LOOCV with two identical points follows the direct computation") {
    // Each point sees the other at distance zero, so every bandwidth has a
    // finite score and the peak height favours the smallest one.
    const Matrix twins = Matrix::column(std::vector<double>{0.5, 0.5});
    const std::vector<double> grid{0.01, 0.1, 1.0};
    const auto scan = loocv_scan(twins, grid);
    for (std::size_t s = 0; s < grid.size(); ++s) {
        CHECK(std::isfinite(scan.scores[s]));
        CHECK(scan.scores[s] == doctest::Approx(oracle::loo_log_likelihood(rows(twins), grid[s])));
    }
    CHECK(scan.sigma == 0.01);
}

TEST_CASE("LOOCV ties go to the smaller bandwidth") {
    const Matrix pts = normal_points(10, 1, 0.0, 4);
    const std::vector<double> grid{0.4, 0.2, 0.2, 0.4};
    const auto scan = loocv_scan(pts, grid);
    CHECK(scan.scores[1] == scan.scores[2]);
    CHECK(scan.scores[0] == scan.scores[3]);
    const bool smaller_wins = scan.scores[1] >= scan.scores[0];
    CHECK(scan.sigma == (smaller_wins ? 0.2 : 0.4));
}

TEST_CASE("LOOCV input validation") {
    const std::vector<double> grid{0.1};
    CHECK_THROWS_AS(loocv_bandwidth(Matrix(1, 1), grid), ArgumentError);
    CHECK_THROWS_AS(loocv_bandwidth(Matrix(3, 1), std::vector<double>{}), ArgumentError);
}

TEST_CASE("KL of a reference against itself is zero") {
    const Matrix test = normal_points(2000, 1, 0.0, 5);
    const auto grid = default_sigma_grid();
    const auto ref = reference_density(test, grid);
    const auto est = kl_fhat_to_f0(ref, test, 9, grid);
    CHECK(std::abs(est.value) <= 0.05);
    CHECK(est.n_eval == 4000);
    CHECK(est.direction == KlDirection::FhatToF0);
    CHECK(est.reference_sigma == ref.kernel().bandwidth());
    CHECK(est.clamped == 0);
}

TEST_CASE("KL sample count is twice the estimate size") {
    const auto fhat = WeightedDensityEstimate::uniform(normal_points(37, 2, 0.0, 6), {KernelFamily::Gaussian, 2, 0.4});
    const auto ref = WeightedDensityEstimate::uniform(normal_points(50, 2, 0.0, 7), {KernelFamily::Gaussian, 2, 0.4});
    CHECK(kl_fhat_to_f0(fhat, ref, 1).n_eval == 74);
}

TEST_CASE("KL estimate is seed deterministic") {
    const auto fhat = WeightedDensityEstimate::uniform(normal_points(100, 1, 0.0, 8), {KernelFamily::Gaussian, 1, 0.3});
    const Matrix test = normal_points(100, 1, 0.5, 9);
    const auto a = kl_fhat_to_f0(fhat, test, 42);
    const auto b = kl_fhat_to_f0(fhat, test, 42);
    CHECK(a.value == b.value);
    CHECK(kl_fhat_to_f0(fhat, test, 43).value != a.value);
}

TEST_CASE("shifted gaussian divergence") {
    const Matrix train = normal_points(2000, 1, 0.0, 10);
    const Matrix test = normal_points(2000, 1, 1.0, 11);
    const auto grid = default_sigma_grid();
    const auto fhat = WeightedDensityEstimate::uniform(
        train, {KernelFamily::Gaussian, 1, loocv_bandwidth(train, grid)});
    CHECK(std::abs(kl_fhat_to_f0(fhat, test, 3, grid).value - 0.5) < 0.15);
}

TEST_CASE("cross entropy examples") {
    const auto single = WeightedDensityEstimate::uniform(Matrix(1, 1), {KernelFamily::Gaussian, 1, 1.0});
    const auto est = kl_f0_to_fhat(single, Matrix(1, 1));
    CHECK(est.value == doctest::Approx(-std::log(1.0 / std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-14));
    CHECK(est.value == doctest::Approx(0.9189).epsilon(1e-4));
    CHECK(est.direction == KlDirection::F0ToFhat);
    CHECK(est.n_eval == 1);

    const auto fhat = WeightedDensityEstimate::uniform(normal_points(300, 2, 0.0, 12), {KernelFamily::Gaussian, 2, 0.3});
    const Matrix test = normal_points(200, 2, 0.0, 13);
    CHECK(kl_f0_to_fhat(fhat, test).value == kl_f0_to_fhat(fhat, test).value);
    CHECK_THROWS_AS(kl_f0_to_fhat(fhat, Matrix(0, 2)), ArgumentError);
}

TEST_CASE("clamping far from every kernel") {
    const auto fhat = WeightedDensityEstimate::uniform(Matrix(1, 1), {KernelFamily::Gaussian, 1, 0.01});
    const Matrix far = Matrix::column(std::vector<double>{1000.0, 0.0});
    const auto est = kl_f0_to_fhat(fhat, far);
    CHECK(est.clamped == 1);
    CHECK(std::isfinite(est.value));
    CHECK(est.value == doctest::Approx((-std::log(kDensityFloor) - std::log(fhat.kernel().peak())) / 2.0));
}

TEST_CASE("self cross entropy concentrates as the sample grows") {
    const auto fhat = WeightedDensityEstimate::uniform(normal_points(200, 1, 0.0, 14), {KernelFamily::Gaussian, 1, 0.3});
    const double entropy = kl_f0_to_fhat(fhat, fhat.sample(400000, 1)).value;
    auto spread = [&](std::size_t m) {
        double dev = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const double v = kl_f0_to_fhat(fhat, fhat.sample(m, 100 + s)).value;
            dev += (v - entropy) * (v - entropy);
        }
        return std::sqrt(dev / 20.0);
    };
    const double small = spread(500);
    const double large = spread(5000);
    CHECK(large < small);
    CHECK(large < 0.05);
}

TEST_CASE("wilcoxon all one direction") {
    std::vector<double> a, b;
    for (int i = 0; i < 12; ++i) {
        a.push_back(1.0 + 0.1 * (i + 1));
        b.push_back(1.0);
    }
    const auto r = wilcoxon_signed_rank(a, b);
    CHECK(r.r1 == 78.0);
    CHECK(r.r2 == 0.0);
    CHECK(r.exact);
    CHECK(r.n_effective == 12);
    CHECK(r.p_value == doctest::Approx(2.0 / 4096.0).epsilon(1e-15));
    const auto swapped = wilcoxon_signed_rank(b, a);
    CHECK(swapped.r1 == 0.0);
    CHECK(swapped.r2 == 78.0);
    CHECK(swapped.p_value == r.p_value);
}

TEST_CASE("wilcoxon small examples") {
    const auto r = wilcoxon_signed_rank(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 2.0});
    CHECK(r.r1 == 1.0);
    CHECK(r.r2 == 2.0);
    CHECK(r.p_value == 1.0);
    const std::vector<double> same{0.1, 0.2, 0.3};
    const auto d = wilcoxon_signed_rank(same, same);
    CHECK(d.n_effective == 0);
    CHECK(d.p_value == 1.0);
    CHECK_THROWS_AS(wilcoxon_signed_rank(same, std::vector<double>{0.1}), ArgumentError);
}

TEST_CASE("wilcoxon midranks on ties") {
    const std::vector<double> a{1.0, 2.0, 3.0, 5.0, 5.0};
    const std::vector<double> b{0.0, 3.0, 2.0, 5.0, 8.0};
    const auto r = wilcoxon_signed_rank(a, b);
    // Differences +1, -1, +1, 0, -3: zero dropped, three tied at rank 2.
    CHECK(r.n_effective == 4);
    CHECK(r.r1 == 4.0);
    CHECK(r.r2 == 6.0);
    CHECK(r.p_value == doctest::Approx(oracle::wilcoxon_p_enumerate(a, b)).epsilon(1e-15));
}

TEST_CASE("wilcoxon matches exhaustive enumeration") {
    std::mt19937_64 rng(15);
    std::uniform_int_distribution<int> len(1, 14);
    std::uniform_int_distribution<int> coarse(-4, 4);
    for (int t = 0; t < 60; ++t) {
        const auto n = static_cast<std::size_t>(len(rng));
        std::vector<double> a(n), b(n, 0.0);
        // Coarse integer differences exercise ties and zeros.
        for (double& x : a) x = t % 2 ? coarse(rng) : coarse(rng) + 0.001 * coarse(rng);
        const auto r = wilcoxon_signed_rank(a, b);
        const auto sr = oracle::signed_ranks(a, b);
        CHECK(r.r1 == sr.r1);
        CHECK(r.r2 == sr.r2);
        CHECK(r.r1 + r.r2 == doctest::Approx(r.n_effective * (r.n_effective + 1) / 2.0));
        CHECK(r.p_value == doctest::Approx(oracle::wilcoxon_p_enumerate(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("wilcoxon exact p agrees with a Monte Carlo null") {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> nd(0.3, 1.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> a(6 + t * 2), b(a.size(), 0.0);
        for (double& x : a) x = nd(rng);
        const auto r = wilcoxon_signed_rank(a, b);
        const auto mc = oracle::wilcoxon_p_monte_carlo(a, b, 200000, 100 + t);
        CHECK(std::abs(r.p_value - mc.p) <= 3.0 * mc.standard_error + 1e-12);
    }
}

TEST_CASE("wilcoxon normal approximation for large samples") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd(0.2, 1.0);
    std::vector<double> a(40), b(40, 0.0);
    for (double& x : a) x = nd(rng);
    const auto r = wilcoxon_signed_rank(a, b);
    CHECK_FALSE(r.exact);
    CHECK(r.r1 + r.r2 == 820.0);
    const auto mc = oracle::wilcoxon_p_monte_carlo(a, b, 200000, 5);
    CHECK(std::abs(r.p_value - mc.p) < 0.01);
}

TEST_CASE("method names and summaries") {
    CHECK(parse_method("rejkde") == Method::RejKde);
    CHECK(to_string(Method::Spkde) == "spkde");
    CHECK_THROWS_AS(parse_method("rkde"), ArgumentError);
    const auto s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(summarize({7.0}).std == 0.0);
}

TEST_CASE("benchmark run shape and recipe") {
    const Dataset data = labelled_dataset(200, 60, 1);
    BenchmarkConfig config;
    config.eps_list = {0.0, 0.2, 0.5};
    config.n_seeds = 2;
    config.sigma_grid = log_spaced(0.02, 0.5, 8);
    const auto r = benchmark_run(data, "blob", config);
    CHECK(r.dataset == "blob");
    REQUIRE(r.eps.size() == 3);

    CHECK(r.eps[0].n_contaminants == 0);
    CHECK(r.eps[0].n_train == 100);
    CHECK(r.eps[0].n_test == 100);
    CHECK(r.eps[1].n_contaminants == 25);
    CHECK(r.eps[2].n_contaminants == 100);
    CHECK_FALSE(r.eps[2].available);
    CHECK_FALSE(r.eps[2].note.empty());
    CHECK(r.eps[2].methods.empty());

    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(r.eps[e].available);
        CHECK(r.eps[e].sigmas.size() == 2);
        REQUIRE(r.eps[e].methods.size() == 3);
        for (const auto& [name, mr] : r.eps[e].methods) {
            CHECK(mr.metrics.size() == 2);
            CHECK(mr.metrics.at("kl_fhat_f0").values.size() == 2);
            CHECK(mr.metrics.at("kl_f0_fhat").values.size() == 2);
            CHECK(mr.not_converged == 0);
        }
    }
}

TEST_CASE("benchmark contaminant count follows eps over one minus eps") {
    const Dataset data = labelled_dataset(800, 120, 2);
    BenchmarkConfig config;
    config.eps_list = {0.2};
    config.methods = {Method::Kde};
    config.sigma = 0.1;
    const auto r = benchmark_run(data, "big", config);
    CHECK(r.eps[0].n_train == 400);
    CHECK(r.eps[0].n_contaminants == 100);
}

TEST_CASE("benchmark run is deterministic") {
    const Dataset data = labelled_dataset(120, 40, 3);
    BenchmarkConfig config;
    config.eps_list = {0.1, 0.25};
    config.n_seeds = 3;
    config.master_seed = 11;
    config.sigma_grid = log_spaced(0.02, 0.5, 6);
    const ExperimentReport a{{benchmark_run(data, "d", config)}};
    const ExperimentReport b{{benchmark_run(data, "d", config)}};
    CHECK(a.to_json() == b.to_json());
    config.master_seed = 12;
    const ExperimentReport c{{benchmark_run(data, "d", config)}};
    CHECK(a.to_json() != c.to_json());
}

TEST_CASE("benchmark input validation") {
    Dataset unlabeled = labelled_dataset(50, 10, 4);
    unlabeled.labels.reset();
    BenchmarkConfig config;
    CHECK_THROWS_AS(benchmark_run(unlabeled, "x", config), ArgumentError);
    config.eps_list = {1.0};
    CHECK_THROWS_AS(benchmark_run(labelled_dataset(50, 10, 4), "x", config), ArgumentError);
}

TEST_CASE("synthetic run reports grid errors") {
    auto spec = fig4_experiment_spec();
    spec.n = 150;
    BenchmarkConfig config;
    config.eps_list = {0.2};
    config.n_seeds = 2;
    const auto r = synthetic_run(spec, config);
    REQUIRE(r.eps.size() == 1);
    for (const auto& [name, mr] : r.eps[0].methods) {
        CHECK(mr.metrics.count("l1") == 1);
        CHECK(mr.metrics.count("l2") == 1);
        for (double v : mr.metrics.at("l1").values) CHECK((v > 0.0 && v < 2.0));
    }
}

TEST_CASE("report serialization") {
    const Dataset data = labelled_dataset(80, 20, 5);
    BenchmarkConfig config;
    config.eps_list = {0.0, 0.2};
    config.sigma = 0.1;
    config.n_seeds = 2;
    const ExperimentReport report{{benchmark_run(data, "toy", config)}};

    const auto j = nlohmann::json::parse(report.to_json());
    const auto& cell = j.at("results").at("toy").at("0.2").at("spkde").at("kl_fhat_f0");
    CHECK(cell.at("values").size() == 2);
    CHECK(cell.at("mean").get<double>() ==
          report.datasets[0].eps[1].methods.at("spkde").metrics.at("kl_fhat_f0").mean);
    CHECK(j.at("cells").at("toy").at("0").at("available").get<bool>());
    CHECK(j.at("cells").at("toy").at("0.2").at("n_contaminants").get<int>() == 10);

    std::stringstream csv;
    report.write_csv(csv);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "dataset,eps,method,metric,mean,std,n_seeds");
    csv.seekg(0);
    const auto back = read_report_csv(csv, "report.csv");
    REQUIRE(back.datasets.size() == 1);
    REQUIRE(back.datasets[0].eps.size() == 2);
    for (std::size_t e = 0; e < 2; ++e) {
        for (const auto& [method, mr] : report.datasets[0].eps[e].methods) {
            for (const auto& [metric, s] : mr.metrics) {
                const auto& got = back.datasets[0].eps[e].methods.at(method).metrics.at(metric);
                CHECK(got.mean == s.mean);
                CHECK(got.std == s.std);
            }
        }
    }
    std::stringstream bad("dataset,eps,method,metric,mean,std,n_seeds\ntoy,x,kde,l1,1,0,1\n");
    CHECK_THROWS_WITH_AS(read_report_csv(bad, "r.csv"), doctest::Contains("r.csv:2"), ArgumentError);
}

TEST_CASE("method comparison across datasets") {
    std::vector<DatasetResult> datasets;
    for (int k = 0; k < 12; ++k) {
        EpsResult er;
        er.eps = 0.2;
        er.methods["spkde"].metrics["kl_fhat_f0"] = summarize({0.1 + 0.01 * k});
        er.methods["kde"].metrics["kl_fhat_f0"] = summarize({0.5 + 0.02 * k});
        datasets.push_back({"d" + std::to_string(k), {er}});
    }
    const auto rows = compare_methods(datasets, "spkde", "kde", "kl_fhat_f0");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].eps == 0.2);
    CHECK(rows[0].result.r1 == 0.0);
    CHECK(rows[0].result.r2 == 78.0);
    CHECK(rows[0].result.p_value == doctest::Approx(4.8828125e-4));
    std::stringstream out;
    write_wilcoxon_csv(out, rows);
    CHECK(out.str() == "eps,R1,R2,p,n_effective,exact\n0.2,0,78,0.00048828125,12,true\n");
}

}  // TEST_SUITE
