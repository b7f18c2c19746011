#include "spkde/contamination.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "spkde/error.hpp"
#include "spkde/io.hpp"

namespace spkde {

bool Box::contains(std::span<const double> x) const {
    for (std::size_t j = 0; j < lo.size(); ++j) {
        if (x[j] < lo[j] || x[j] > hi[j]) return false;
    }
    return true;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void validate_box(const Box& box) {
    if (box.lo.empty() || box.lo.size() != box.hi.size()) {
        throw ArgumentError("box: lo and hi must be nonempty and of equal length");
    }
    for (std::size_t j = 0; j < box.lo.size(); ++j) {
        if (!(box.lo[j] < box.hi[j]) || !std::isfinite(box.lo[j]) || !std::isfinite(box.hi[j])) {
            throw ArgumentError("box: need finite lo < hi on every axis");
        }
    }
}

std::string box_text(const Box& box) {
    std::string s;
    for (std::size_t j = 0; j < box.lo.size(); ++j) {
        if (j > 0) s += 'x';
        s += '[' + format_double(box.lo[j]) + ',' + format_double(box.hi[j]) + ']';
    }
    return s;
}

}  // namespace

Distribution Distribution::gaussian_mixture(std::vector<GaussianComponent> components,
                                            std::optional<Box> truncation) {
    if (components.empty()) throw ArgumentError("gaussian_mixture: no components");
    Distribution dist;
    dist.kind_ = Kind::GaussianMixture;
    dist.dim_ = components.front().mean.size();
    if (dist.dim_ == 0) throw ArgumentError("gaussian_mixture: empty mean");
    double total = 0.0;
    for (const auto& c : components) {
        if (c.mean.size() != dist.dim_ || c.sd.size() != dist.dim_) {
            throw ArgumentError("gaussian_mixture: component dimensions disagree");
        }
        if (!(c.weight > 0.0)) throw ArgumentError("gaussian_mixture: weights must be positive");
        for (double s : c.sd) {
            if (!(s > 0.0)) throw ArgumentError("gaussian_mixture: sd must be positive");
        }
        total += c.weight;
        dist.cumulative_weights_.push_back(total);
    }
    for (auto& c : components) c.weight /= total;
    for (double& w : dist.cumulative_weights_) w /= total;

    dist.name_ = "gaussian_mixture(";
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        if (k > 0) dist.name_ += " + ";
        dist.name_ += format_double(c.weight) + "*N(";
        for (std::size_t j = 0; j < dist.dim_; ++j) {
            if (j > 0) dist.name_ += ';';
            dist.name_ += format_double(c.mean[j]) + ',' + format_double(c.sd[j]);
        }
        dist.name_ += ')';
    }
    dist.name_ += ')';

    if (truncation) {
        validate_box(*truncation);
        if (truncation->lo.size() != dist.dim_) {
            throw ArgumentError("gaussian_mixture: truncation box dimension mismatch");
        }
        double inside = 0.0;
        for (const auto& c : components) {
            double p = c.weight;
            for (std::size_t j = 0; j < dist.dim_; ++j) {
                p *= normal_cdf((truncation->hi[j] - c.mean[j]) / c.sd[j]) -
                     normal_cdf((truncation->lo[j] - c.mean[j]) / c.sd[j]);
            }
            inside += p;
        }
        if (!(inside > 1e-6)) throw ArgumentError("gaussian_mixture: truncation box holds no mass");
        dist.inside_mass_ = inside;
        dist.name_ += " on " + box_text(*truncation);
    }
    dist.components_ = std::move(components);
    dist.box_ = std::move(truncation);
    return dist;
}

Distribution Distribution::uniform_box(Box box) {
    validate_box(box);
    Distribution dist;
    dist.kind_ = Kind::Uniform;
    dist.dim_ = box.lo.size();
    dist.box_volume_ = 1.0;
    for (std::size_t j = 0; j < dist.dim_; ++j) dist.box_volume_ *= box.hi[j] - box.lo[j];
    dist.name_ = "uniform" + box_text(box);
    dist.box_ = std::move(box);
    return dist;
}

double Distribution::pdf(std::span<const double> x) const {
    if (x.size() != dim_) throw ArgumentError("Distribution::pdf: dimension mismatch");
    if (box_ && !box_->contains(x)) return 0.0;
    if (kind_ == Kind::Uniform) return 1.0 / box_volume_;
    double total = 0.0;
    for (const auto& c : components_) {
        double p = c.weight;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double z = (x[j] - c.mean[j]) / c.sd[j];
            p *= std::exp(-0.5 * z * z) / (c.sd[j] * std::sqrt(2.0 * std::numbers::pi));
        }
        total += p;
    }
    return total / inside_mass_;
}

double Distribution::cdf(double x) const {
    if (dim_ != 1) throw UnsupportedError("Distribution::cdf: only 1-D distributions");
    if (kind_ == Kind::Uniform) {
        return std::clamp((x - box_->lo[0]) / (box_->hi[0] - box_->lo[0]), 0.0, 1.0);
    }
    auto raw = [this](double t) {
        double total = 0.0;
        for (const auto& c : components_) total += c.weight * normal_cdf((t - c.mean[0]) / c.sd[0]);
        return total;
    };
    if (!box_) return raw(x);
    if (x <= box_->lo[0]) return 0.0;
    if (x >= box_->hi[0]) return 1.0;
    return (raw(x) - raw(box_->lo[0])) / inside_mass_;
}

std::vector<double> Distribution::sample(std::mt19937_64& rng) const {
    std::vector<double> x(dim_);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (kind_ == Kind::Uniform) {
        for (std::size_t j = 0; j < dim_; ++j) {
            x[j] = box_->lo[j] + (box_->hi[j] - box_->lo[j]) * unit(rng);
        }
        return x;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int kMaxTries = 1000000;
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        const double u = unit(rng);
        auto it = std::upper_bound(cumulative_weights_.begin(), cumulative_weights_.end(), u);
        const std::size_t k = std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative_weights_.begin()), components_.size() - 1);
        const auto& c = components_[k];
        for (std::size_t j = 0; j < dim_; ++j) x[j] = c.mean[j] + c.sd[j] * normal(rng);
        if (!box_ || box_->contains(x)) return x;
    }
    throw NumericError("Distribution::sample: rejection sampling did not accept a draw");
}

void ContaminationSpec::validate() const {
    if (!(eps >= 0.0 && eps < 1.0)) throw ArgumentError("contamination: eps must lie in [0, 1)");
    if (n < 1) throw ArgumentError("contamination: n must be >= 1");
    if (target.dim() != contaminant.dim()) {
        throw ArgumentError("contamination: target and contaminant dimensions differ");
    }
}

std::string_view to_string(Source source) {
    return source == Source::Target ? "target" : "contaminant";
}

std::vector<LabeledSample> sample_mixture(const ContaminationSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<LabeledSample> out;
    out.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        if (unit(rng) < spec.eps) {
            out.push_back({spec.contaminant.sample(rng), Source::Contaminant});
        } else {
            out.push_back({spec.target.sample(rng), Source::Target});
        }
    }
    return out;
}

Matrix sample_points(std::span<const LabeledSample> samples) {
    if (samples.empty()) return Matrix(0, 0);
    const std::size_t d = samples.front().point.size();
    Matrix m(samples.size(), d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].point.size() != d) throw ArgumentError("sample_points: ragged sample");
        std::copy(samples[i].point.begin(), samples[i].point.end(), m.row(i).begin());
    }
    return m;
}

ContaminationSpec fig4_experiment_spec() {
    ContaminationSpec spec;
    spec.name = "fig4";
    spec.target = Distribution::gaussian_mixture(
        {{0.7, {-0.7}, {0.25}}, {0.3, {0.9}, {0.2}}}, Box{{-2.0}, {2.0}});
    spec.contaminant = Distribution::uniform_box({{-2.0}, {2.0}});
    spec.eps = 0.2;
    spec.n = 500;
    spec.beta = 1.25;
    spec.grid = {{-4.0}, {8000}, 1e-3};
    return spec;
}

ContaminationSpec piecewise_experiment_spec() {
    ContaminationSpec spec;
    spec.name = "piecewise";
    spec.target = Distribution::uniform_box({{0.0}, {0.5}});
    spec.contaminant = Distribution::uniform_box({{0.0}, {1.0}});
    spec.eps = 0.2;
    spec.n = 500;
    spec.beta = 1.25;
    spec.grid = {{0.0}, {1000}, 1e-3};
    return spec;
}

ContaminationSpec uniform01_experiment_spec() {
    ContaminationSpec spec;
    spec.name = "uniform01";
    spec.target = Distribution::uniform_box({{0.0}, {1.0}});
    spec.contaminant = Distribution::uniform_box({{0.0}, {1.0}});
    spec.eps = 0.5;
    spec.n = 500;
    spec.beta = 2.0;
    spec.grid = {{0.0}, {1000}, 1e-3};
    return spec;
}

ContaminationSpec named_scenario(std::string_view name) {
    if (name == "fig4") return fig4_experiment_spec();
    if (name == "piecewise") return piecewise_experiment_spec();
    if (name == "uniform01") return uniform01_experiment_spec();
    throw ArgumentError("unknown scenario '" + std::string(name) +
                        "' (expected fig4, piecewise or uniform01)");
}

Matrix AffineTransform::apply(const Matrix& data) const {
    if (data.cols() != lo.size()) throw ArgumentError("AffineTransform: dimension mismatch");
    Matrix out(data.rows(), data.cols());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            out(i, j) = degenerate[j] ? 0.5 : (data(i, j) - lo[j]) / span[j];
        }
    }
    return out;
}

Matrix AffineTransform::inverse(const Matrix& scaled) const {
    if (scaled.cols() != lo.size()) throw ArgumentError("AffineTransform: dimension mismatch");
    Matrix out(scaled.rows(), scaled.cols());
    for (std::size_t i = 0; i < scaled.rows(); ++i) {
        for (std::size_t j = 0; j < scaled.cols(); ++j) {
            out(i, j) = degenerate[j] ? lo[j] : lo[j] + scaled(i, j) * span[j];
        }
    }
    return out;
}

bool AffineTransform::any_degenerate() const {
    return std::find(degenerate.begin(), degenerate.end(), true) != degenerate.end();
}

UnitCubeScaling scale_to_unit_cube(const Matrix& data) {
    if (data.rows() < 2) throw ArgumentError("scale_to_unit_cube: need at least 2 rows");
    const std::size_t d = data.cols();
    AffineTransform t{std::vector<double>(d), std::vector<double>(d), std::vector<bool>(d)};
    for (std::size_t j = 0; j < d; ++j) {
        double lo = data(0, j);
        double hi = data(0, j);
        for (std::size_t i = 1; i < data.rows(); ++i) {
            lo = std::min(lo, data(i, j));
            hi = std::max(hi, data(i, j));
        }
        t.lo[j] = lo;
        t.span[j] = hi - lo;
        t.degenerate[j] = !(hi > lo);
    }
    Matrix scaled = t.apply(data);
    // Rounding can leave a value a hair outside [0, 1]; the contract is exact.
    for (double& v : scaled.data()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return {std::move(scaled), std::move(t)};
}

RejKdeFit fit_rejkde(const Matrix& points, const KernelSpec& spec, double reject_fraction) {
    if (!(reject_fraction >= 0.0 && reject_fraction < 1.0)) {
        throw ArgumentError("fit_rejkde: reject_fraction must lie in [0, 1)");
    }
    const std::size_t n = points.rows();
    if (n < 2) throw ArgumentError("fit_rejkde: need at least 2 points");
    const auto drop = static_cast<std::size_t>(
        std::floor(reject_fraction * static_cast<double>(n) + 1e-9));
    if (drop >= n) throw ArgumentError("fit_rejkde: every point would be rejected");

    const auto pilot = WeightedDensityEstimate::uniform(points, spec);
    const std::vector<double> score = pilot.eval(points);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

    std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(drop));
    std::vector<bool> keep(n, true);
    for (std::size_t i : rejected) keep[i] = false;
    Matrix survivors(n - drop, points.cols());
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        std::copy(points.row(i).begin(), points.row(i).end(), survivors.row(r).begin());
        ++r;
    }
    return {WeightedDensityEstimate::uniform(std::move(survivors), spec), std::move(rejected)};
}

GridTruth grid_truth(const ContaminationSpec& spec, const GridParams& grid) {
    spec.validate();
    if (spec.target.dim() > 2) throw UnsupportedError("grid_truth: only 1-D and 2-D scenarios");
    if (grid.origin.size() != spec.target.dim()) {
        throw ArgumentError("grid_truth: grid dimension does not match the scenario");
    }
    const std::vector<double> cell(grid.origin.size(), grid.h);
    auto tab = [&](const Distribution& dist) {
        return GridDensity::tabulate(grid.origin, cell, grid.shape,
                                     [&](std::span<const double> x) { return dist.pdf(x); })
            .normalized();
    };
    GridDensity f_tar = tab(spec.target);
    GridDensity f_con = tab(spec.contaminant);
    GridDensity f_obs = mix(f_tar, f_con, spec.eps);
    return {std::move(f_tar), std::move(f_con), std::move(f_obs)};
}

GridTruth grid_truth(const ContaminationSpec& spec) { return grid_truth(spec, spec.grid); }

}  // namespace spkde
