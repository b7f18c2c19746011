#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "spkde/kernels.hpp"

using namespace spkde;

namespace {

Matrix random_points(std::size_t n, std::size_t d, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(n, d);
    for (double& v : m.data()) v = u(rng);
    return m;
}

std::vector<double> random_simplex(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (double& v : w) total += v = e(rng);
    for (double& v : w) v /= total;
    return w;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("kernel values at zero distance") {
    const double o[1] = {0.0};
    CHECK(kernel_eval({KernelFamily::Gaussian, 1, 1.0}, o, o) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(kernel_eval({KernelFamily::Cauchy, 1, 1.0}, o, o) ==
          doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
    CHECK(kernel_eval({KernelFamily::Gaussian, 1, 1.0}, o, o) == doctest::Approx(0.398942).epsilon(1e-6));
    CHECK(kernel_eval({KernelFamily::Cauchy, 1, 1.0}, o, o) == doctest::Approx(0.318310).epsilon(1e-6));
}

TEST_CASE("kernel values match the textbook densities") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::size_t d : {1u, 2u, 3u, 5u}) {
        for (double sigma : {0.2, 1.0, 2.5}) {
            std::vector<double> x(d), y(d);
            for (auto& v : x) v = u(rng);
            for (auto& v : y) v = u(rng);
            CHECK(kernel_eval({KernelFamily::Gaussian, d, sigma}, x, y) ==
                  doctest::Approx(oracle::gaussian_density(x, y, sigma)).epsilon(1e-13));
            CHECK(kernel_eval({KernelFamily::Cauchy, d, sigma}, x, y) ==
                  doctest::Approx(oracle::cauchy_density(x, y, sigma)).epsilon(1e-13));
        }
    }
}

TEST_CASE("kernel is symmetric and strictly positive") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (auto family : {KernelFamily::Gaussian, KernelFamily::Cauchy}) {
        const KernelSpec spec(family, 3, 0.7);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> x(3), y(3);
            for (auto& v : x) v = u(rng);
            for (auto& v : y) v = u(rng);
            CHECK(kernel_eval(spec, x, y) == kernel_eval(spec, y, x));
            CHECK(kernel_eval(spec, x, y) > 0.0);
        }
    }
}

TEST_CASE("kernel spec validation") {
    CHECK_THROWS_AS(KernelSpec(KernelFamily::Gaussian, 0, 1.0), ArgumentError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::Gaussian, 1, 0.0), ArgumentError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::Cauchy, 1, -1.0), ArgumentError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::Cauchy, 1, INFINITY), ArgumentError);
    const double x[2] = {0.0, 0.0};
    const double y[1] = {0.0};
    CHECK_THROWS_AS(kernel_eval({KernelFamily::Gaussian, 2, 1.0}, x, y), ArgumentError);
    CHECK(parse_kernel_family("cauchy") == KernelFamily::Cauchy);
    CHECK_THROWS_AS(parse_kernel_family("epanechnikov"), ArgumentError);
}

TEST_CASE("both families carry a closed-form Gram entry") {
    CHECK(kernel_traits(KernelFamily::Gaussian).closed_form_gram);
    CHECK(kernel_traits(KernelFamily::Cauchy).closed_form_gram);
    CHECK(KernelSpec(KernelFamily::Gaussian, 1, 1.0).gram_kernel().bandwidth() ==
          doctest::Approx(std::sqrt(2.0)));
    CHECK(KernelSpec(KernelFamily::Cauchy, 1, 1.0).gram_kernel().bandwidth() == 2.0);
}

TEST_CASE("gram diagonal examples") {
    const Matrix one = Matrix::column(std::vector<double>{0.0});
    const Matrix g = gram_matrix(one, {KernelFamily::Gaussian, 1, 1.0});
    CHECK(g.rows() == 1);
    CHECK(g(0, 0) == doctest::Approx(1.0 / (2.0 * std::sqrt(std::numbers::pi))).epsilon(1e-14));
    CHECK(g(0, 0) == doctest::Approx(0.282095).epsilon(1e-6));
    const Matrix c = gram_matrix(one, {KernelFamily::Cauchy, 1, 1.0});
    CHECK(c(0, 0) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(c(0, 0) == doctest::Approx(0.159155).epsilon(1e-6));
}

TEST_CASE("gram entries agree with quadrature") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_real_distribution<double> s(0.3, 1.5);
    for (std::size_t d : {1u, 2u}) {
        for (int t = 0; t < 4; ++t) {
            const double sigma = s(rng);
            Matrix pts(2, d);
            for (double& v : pts.data()) v = u(rng);
            const Matrix gg = gram_matrix(pts, {KernelFamily::Gaussian, d, sigma});
            const Matrix gc = gram_matrix(pts, {KernelFamily::Cauchy, d, sigma});
            const double qg = oracle::gram_entry_quadrature(oracle::gaussian_density, pts.row(0),
                                                            pts.row(1), sigma);
            const double qc = oracle::gram_entry_quadrature(oracle::cauchy_density, pts.row(0),
                                                            pts.row(1), sigma);
            CHECK(std::abs(gg(0, 1) - qg) <= 1e-6 * qg);
            CHECK(std::abs(gc(0, 1) - qc) <= 1e-6 * qc);
        }
    }
}

TEST_CASE("gram matrix is exactly symmetric and PSD") {
    for (auto family : {KernelFamily::Gaussian, KernelFamily::Cauchy}) {
        for (std::size_t d : {1u, 2u, 5u}) {
            const std::size_t n = 80;
            const Matrix pts = random_points(n, d, -1.0, 1.0, 100 + d);
            const Matrix g = gram_matrix(pts, {family, d, 0.4});
            Eigen::MatrixXd e(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    REQUIRE(g(i, j) == g(j, i));
                    e(i, j) = g(i, j);
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e, Eigen::EigenvaluesOnly);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * static_cast<double>(n));
        }
    }
}

TEST_CASE("gram input validation") {
    CHECK_THROWS_AS(gram_matrix(Matrix(0, 1), {KernelFamily::Gaussian, 1, 1.0}), ArgumentError);
    CHECK_THROWS_AS(gram_matrix(Matrix(3, 2), {KernelFamily::Gaussian, 1, 1.0}), ArgumentError);
}

TEST_CASE("estimate evaluation examples") {
    const KernelSpec spec(KernelFamily::Gaussian, 2, 0.6);
    const Matrix one(1, 2, std::vector<double>{0.3, -0.2});
    const WeightedDensityEstimate single(one, {1.0}, spec);
    const double q[2] = {1.0, 0.5};
    CHECK(single.eval(q) == doctest::Approx(kernel_eval(spec, q, one.row(0))).epsilon(1e-15));

    const Matrix pts = random_points(7, 2, -1.0, 1.0, 9);
    const auto kde = WeightedDensityEstimate::uniform(pts, spec);
    double mean = 0.0;
    for (std::size_t i = 0; i < 7; ++i) mean += kernel_eval(spec, q, pts.row(i)) / 7.0;
    CHECK(kde.eval(q) == doctest::Approx(mean).epsilon(1e-14));
    CHECK_THROWS_AS(kde.eval(std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("weighted evaluation matches a double loop") {
    std::mt19937_64 rng(17);
    for (auto family : {KernelFamily::Gaussian, KernelFamily::Cauchy}) {
        const KernelSpec spec(family, 3, 0.8);
        const Matrix pts = random_points(5, 3, -1.0, 1.0, 21);
        const WeightedDensityEstimate est(pts, random_simplex(5, rng), spec);
        const Matrix queries = random_points(40, 3, -2.0, 2.0, 22);
        const auto values = estimate_eval(est, queries);
        for (std::size_t q = 0; q < queries.rows(); ++q) {
            double direct = 0.0;
            for (std::size_t i = 0; i < 5; ++i) {
                direct += est.weights()[i] * kernel_eval(spec, queries.row(q), pts.row(i));
            }
            CHECK(std::abs(values[q] - direct) <= 1e-14);
        }
    }
}

TEST_CASE("estimate rejects weights off the simplex") {
    const KernelSpec spec(KernelFamily::Gaussian, 1, 1.0);
    const Matrix pts = Matrix::column(std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(WeightedDensityEstimate(pts, {0.5, 0.6}, spec), ArgumentError);
    CHECK_THROWS_AS(WeightedDensityEstimate(pts, {1.5, -0.5}, spec), ArgumentError);
    CHECK_THROWS_AS(WeightedDensityEstimate(pts, {1.0}, spec), ArgumentError);
    CHECK(on_simplex(std::vector<double>{0.25, 0.75}));
    CHECK_FALSE(on_simplex(std::vector<double>{}));
}

TEST_CASE("sampling from a single active component") {
    const KernelSpec spec(KernelFamily::Gaussian, 2, 0.5);
    const Matrix pts(3, 2, std::vector<double>{4.0, -3.0, 0.0, 0.0, -4.0, 3.0});
    const WeightedDensityEstimate est(pts, {1.0, 0.0, 0.0}, spec);
    const Matrix draws = estimate_sample(est, 20000, 1);
    double mx = 0.0, my = 0.0;
    for (std::size_t s = 0; s < draws.rows(); ++s) {
        mx += draws(s, 0) / 20000.0;
        my += draws(s, 1) / 20000.0;
        // Every draw stays far closer to the first center than to the others.
        REQUIRE(std::hypot(draws(s, 0) - 4.0, draws(s, 1) + 3.0) < 4.0);
    }
    CHECK(mx == doctest::Approx(4.0).epsilon(0.01));
    CHECK(my == doctest::Approx(-3.0).epsilon(0.01));
}

TEST_CASE("gaussian sample variance") {
    const auto est = WeightedDensityEstimate::uniform(Matrix(1, 1), {KernelFamily::Gaussian, 1, 1.0});
    const Matrix draws = est.sample(100000, 42);
    double mean = 0.0, sq = 0.0;
    for (double v : draws.data()) {
        mean += v;
        sq += v * v;
    }
    mean /= 1e5;
    const double var = sq / 1e5 - mean * mean;
    CHECK(std::abs(var - 1.0) < 0.05);
    CHECK(est.sample(0, 1).rows() == 0);
}

TEST_CASE("sampling is seed deterministic") {
    const auto est = WeightedDensityEstimate::uniform(random_points(10, 2, 0.0, 1.0, 4),
                                                      {KernelFamily::Cauchy, 2, 0.1});
    CHECK(est.sample(500, 9) == est.sample(500, 9));
    CHECK_FALSE(est.sample(500, 9) == est.sample(500, 10));
}

TEST_CASE("cauchy draws follow the cauchy density") {
    const double sigma = 0.7;
    const auto est = WeightedDensityEstimate::uniform(Matrix(1, 1), {KernelFamily::Cauchy, 1, sigma});
    const std::size_t m = 200000;
    const Matrix draws = est.sample(m, 77);
    const std::vector<double> edges{-1e300, -5.0, -2.0, -1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0, 2.0, 5.0, 1e300};
    std::vector<double> counts(edges.size() - 1, 0.0);
    for (double v : draws.data()) {
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            if (v >= edges[b] && v < edges[b + 1]) counts[b] += 1.0;
        }
    }
    boost::math::quadrature::tanh_sinh<double> inner;
    boost::math::quadrature::exp_sinh<double> half;
    const double zero[1] = {0.0};
    auto pdf = [&](double t) {
        const double p[1] = {t};
        return oracle::cauchy_density(p, zero, sigma);
    };
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        double prob;
        if (b == 0) {
            prob = half.integrate([&](double t) { return pdf(edges[1] - t); }, 0.0, INFINITY);
        } else if (b + 2 == edges.size()) {
            prob = half.integrate([&](double t) { return pdf(edges[b] + t); }, 0.0, INFINITY);
        } else {
            prob = inner.integrate(pdf, edges[b], edges[b + 1]);
        }
        const double expected = prob * static_cast<double>(m);
        CHECK(std::abs(counts[b] - expected) < 4.5 * std::sqrt(expected));
    }
}

TEST_CASE("gaussian kernel mass on a grid") {
    const double sigma = 0.3;
    const double h = 1e-3;
    {
        const double c[1] = {0.0};
        double mass = 0.0;
        const KernelSpec spec(KernelFamily::Gaussian, 1, sigma);
        for (double x = -8.0 * sigma + h / 2; x < 8.0 * sigma; x += h) {
            const double p[1] = {x};
            mass += kernel_eval(spec, p, c) * h;
        }
        CHECK(std::abs(mass - 1.0) < 1e-6);
    }
    {
        const double c[2] = {0.0, 0.0};
        const double h2 = 0.01;
        const KernelSpec spec(KernelFamily::Gaussian, 2, sigma);
        double mass = 0.0;
        const auto cells = static_cast<int>(std::lround(16.0 * sigma / h2));
        for (int i = 0; i < cells; ++i) {
            for (int j = 0; j < cells; ++j) {
                const double p[2] = {-8.0 * sigma + (i + 0.5) * h2, -8.0 * sigma + (j + 0.5) * h2};
                mass += kernel_eval(spec, p, c) * h2 * h2;
            }
        }
        CHECK(std::abs(mass - 1.0) < 1e-6);
    }
}

}  // TEST_SUITE
