#include "spkde/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "spkde/error.hpp"
#include "spkde/grid.hpp"
#include "spkde/simd/ops.hpp"

namespace spkde {

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) {
        throw ArgumentError("log_spaced: need 0 < lo <= hi and count >= 1");
    }
    if (count == 1) return {lo};
    std::vector<double> out(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> default_sigma_grid() { return log_spaced(0.01, 3.0, 30); }

LoocvResult loocv_scan(const Matrix& points, std::span<const double> sigma_grid,
                       KernelFamily family) {
    const std::size_t n = points.rows();
    if (n < 2) throw ArgumentError("loocv_bandwidth: need at least 2 points");
    if (sigma_grid.empty()) throw ArgumentError("loocv_bandwidth: empty bandwidth grid");
    std::vector<KernelSpec> specs;
    for (double s : sigma_grid) specs.emplace_back(family, points.cols(), s);

    const auto& ops = simd::active();
    const Matrix cols = points.transposed();
    std::vector<double> sq(n);
    std::vector<double> k(n);
    const double log_norm = std::log(static_cast<double>(n - 1));
    std::vector<double> scores(specs.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        ops.sq_dist(cols.data().data(), n, points.cols(), points.row(i).data(), sq.data());
        sq[i] = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < specs.size(); ++s) {
            if (scores[s] == -std::numeric_limits<double>::infinity()) continue;
            specs[s].from_sq_dist(sq, k);
            const double total = pairwise_sum(k);
            scores[s] += total > 0.0 ? std::log(total) - log_norm
                                     : -std::numeric_limits<double>::infinity();
        }
    }

    std::size_t best = 0;
    for (std::size_t s = 1; s < specs.size(); ++s) {
        const bool better = scores[s] > scores[best] ||
                            (scores[s] == scores[best] && sigma_grid[s] < sigma_grid[best]);
        if (better) best = s;
    }
    return {sigma_grid[best], std::move(scores),
            std::vector<double>(sigma_grid.begin(), sigma_grid.end())};
}

double loocv_bandwidth(const Matrix& points, std::span<const double> sigma_grid,
                       KernelFamily family) {
    return loocv_scan(points, sigma_grid, family).sigma;
}

std::string_view to_string(KlDirection direction) {
    return direction == KlDirection::FhatToF0 ? "fhat_to_f0" : "f0_to_fhat";
}

WeightedDensityEstimate reference_density(const Matrix& test_points,
                                          std::span<const double> sigma_grid) {
    if (test_points.rows() == 0) throw ArgumentError("reference_density: no test points");
    const double sigma = loocv_bandwidth(test_points, sigma_grid, KernelFamily::Gaussian);
    return WeightedDensityEstimate::uniform(
        test_points, KernelSpec(KernelFamily::Gaussian, test_points.cols(), sigma));
}

namespace {

double clamped_log(double v, std::size_t& clamped) {
    if (!(v >= kDensityFloor)) {
        ++clamped;
        v = kDensityFloor;
    }
    return std::log(v);
}

}  // namespace

KlEstimate kl_fhat_to_f0(const WeightedDensityEstimate& fhat,
                         const WeightedDensityEstimate& reference, std::uint64_t seed) {
    if (reference.dim() != fhat.dim()) throw ArgumentError("kl_fhat_to_f0: dimension mismatch");
    const std::size_t m = 2 * fhat.size();
    const Matrix draws = fhat.sample(m, seed);
    const std::vector<double> p = fhat.eval(draws);
    const std::vector<double> q = reference.eval(draws);
    KlEstimate est;
    est.direction = KlDirection::FhatToF0;
    est.n_eval = m;
    est.reference_sigma = reference.kernel().bandwidth();
    std::vector<double> terms(m);
    for (std::size_t i = 0; i < m; ++i) {
        terms[i] = clamped_log(p[i], est.clamped) - clamped_log(q[i], est.clamped);
    }
    est.value = pairwise_sum(terms) / static_cast<double>(m);
    return est;
}

KlEstimate kl_fhat_to_f0(const WeightedDensityEstimate& fhat, const Matrix& test_points,
                         std::uint64_t seed, std::span<const double> sigma_grid) {
    if (test_points.cols() != fhat.dim() && test_points.rows() > 0) {
        throw ArgumentError("kl_fhat_to_f0: dimension mismatch");
    }
    return kl_fhat_to_f0(fhat, reference_density(test_points, sigma_grid), seed);
}

KlEstimate kl_fhat_to_f0(const WeightedDensityEstimate& fhat, const Matrix& test_points,
                         std::uint64_t seed) {
    const std::vector<double> grid = default_sigma_grid();
    return kl_fhat_to_f0(fhat, test_points, seed, grid);
}

KlEstimate kl_f0_to_fhat(const WeightedDensityEstimate& fhat, const Matrix& test_points) {
    if (test_points.rows() == 0) throw ArgumentError("kl_f0_to_fhat: no test points");
    const std::vector<double> p = fhat.eval(test_points);
    KlEstimate est;
    est.direction = KlDirection::F0ToFhat;
    est.n_eval = p.size();
    std::vector<double> terms(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) terms[i] = -clamped_log(p[i], est.clamped);
    est.value = pairwise_sum(terms) / static_cast<double>(p.size());
    return est;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw ArgumentError("wilcoxon_signed_rank: need two nonempty sequences of equal length");
    }
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw ArgumentError("wilcoxon_signed_rank: non-finite input");
        }
        if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
    }
    WilcoxonResult res;
    const std::size_t n = diff.size();
    res.n_effective = n;
    if (n == 0) return res;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diff[x]) < std::abs(diff[y]);
    });
    // Doubled midranks are integers: a tie block covering positions i..j-1
    // (1-based ranks i+1..j) gets doubled rank i + j + 1.
    std::vector<std::size_t> rank2(n);
    std::size_t tie_term = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && std::abs(diff[order[j]]) == std::abs(diff[order[i]])) ++j;
        for (std::size_t k = i; k < j; ++k) rank2[order[k]] = i + j + 1;
        const std::size_t t = j - i;
        tie_term += t * t * t - t;
        i = j;
    }
    std::size_t r1_2 = 0;
    std::size_t r2_2 = 0;
    for (std::size_t i = 0; i < n; ++i) (diff[i] > 0.0 ? r1_2 : r2_2) += rank2[i];
    res.r1 = 0.5 * static_cast<double>(r1_2);
    res.r2 = 0.5 * static_cast<double>(r2_2);
    const std::size_t t2 = std::min(r1_2, r2_2);
    const std::size_t total2 = r1_2 + r2_2;

    constexpr std::size_t kExactLimit = 25;
    if (n <= kExactLimit) {
        // counts[s]: number of sign assignments whose positive doubled rank sum is s.
        std::vector<double> counts(total2 + 1, 0.0);
        counts[0] = 1.0;
        std::size_t reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = reach + 1; s-- > 0;) {
                if (counts[s] != 0.0) counts[s + rank2[i]] += counts[s];
            }
            reach += rank2[i];
        }
        double hits = 0.0;
        for (std::size_t s = 0; s <= total2; ++s) {
            if (std::min(s, total2 - s) <= t2) hits += counts[s];
        }
        res.p_value = std::min(1.0, std::ldexp(hits, -static_cast<int>(n)));
        res.exact = true;
    } else {
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 -
                           static_cast<double>(tie_term) / 48.0;
        const double z = (0.5 * static_cast<double>(t2) - mean + 0.5) / std::sqrt(var);
        res.p_value = std::min(1.0, 2.0 * normal_cdf(z));
        res.exact = false;
    }
    return res;
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::Kde: return "kde";
        case Method::Spkde: return "spkde";
        case Method::RejKde: return "rejkde";
    }
    throw InternalError("unknown method");
}

Method parse_method(std::string_view name) {
    if (name == "kde") return Method::Kde;
    if (name == "spkde") return Method::Spkde;
    if (name == "rejkde") return Method::RejKde;
    throw ArgumentError("unknown method '" + std::string(name) +
                        "' (expected kde, spkde or rejkde)");
}

MetricSummary summarize(std::vector<double> values) {
    MetricSummary s;
    s.values = std::move(values);
    const std::size_t n = s.values.size();
    if (n == 0) return s;
    s.mean = pairwise_sum(s.values) / static_cast<double>(n);
    if (n > 1) {
        std::vector<double> dev(n);
        for (std::size_t i = 0; i < n; ++i) dev[i] = (s.values[i] - s.mean) * (s.values[i] - s.mean);
        s.std = std::sqrt(pairwise_sum(dev) / static_cast<double>(n - 1));
    }
    return s;
}

namespace {

std::string eps_key(double eps) { return format_double(eps); }

std::mt19937_64 cell_rng(std::uint64_t master, std::size_t cell) {
    const auto c = static_cast<std::uint64_t>(cell);
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    return std::mt19937_64(seq);
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::copy(m.row(idx[r]).begin(), m.row(idx[r]).end(), out.row(r).begin());
    }
    return out;
}

struct FittedMethod {
    WeightedDensityEstimate estimate;
    bool converged = true;
};

FittedMethod fit_method(Method method, const Matrix& train, const KernelSpec& kernel, double beta,
                        const BenchmarkConfig& config) {
    switch (method) {
        case Method::Kde: return {fit_kde(train, kernel), true};
        case Method::Spkde: {
            SpkdeFit fit = fit_spkde(train, kernel, beta, config.solver);
            return {std::move(fit.estimate), fit.report.converged};
        }
        case Method::RejKde:
            return {fit_rejkde(train, kernel, config.reject_fraction).estimate, true};
    }
    throw InternalError("unknown method");
}

void validate_config(const BenchmarkConfig& config) {
    if (config.eps_list.empty()) throw ArgumentError("benchmark: empty eps list");
    for (double e : config.eps_list) {
        if (!(e >= 0.0 && e < 1.0)) throw ArgumentError("benchmark: eps must lie in [0, 1)");
    }
    if (config.methods.empty()) throw ArgumentError("benchmark: no methods");
    if (config.n_seeds == 0) throw ArgumentError("benchmark: need at least one seed");
    if (config.beta && !(*config.beta >= 1.0)) throw ArgumentError("benchmark: beta must be >= 1");
    if (!config.sigma && config.sigma_grid.empty()) throw ArgumentError("benchmark: empty sigma grid");
}

/// Accumulates per-seed metric values for one eps entry.
struct CellCollector {
    std::map<std::string, std::map<std::string, std::vector<double>>> values;
    std::map<std::string, std::size_t> clamped;
    std::map<std::string, std::size_t> not_converged;

    void finish(EpsResult& out) {
        for (auto& [method, metrics] : values) {
            MethodResult mr;
            for (auto& [metric, v] : metrics) mr.metrics[metric] = summarize(std::move(v));
            mr.clamped = clamped[method];
            mr.not_converged = not_converged[method];
            out.methods[method] = std::move(mr);
        }
    }
};

}  // namespace

DatasetResult benchmark_run(const Dataset& dataset, std::string_view name,
                            const BenchmarkConfig& config) {
    validate_config(config);
    if (!dataset.labels) throw ArgumentError("benchmark: dataset has no label column");
    const Matrix scaled = scale_to_unit_cube(dataset.features).scaled;
    std::vector<std::size_t> label0;
    std::vector<std::size_t> label1;
    for (std::size_t i = 0; i < dataset.labels->size(); ++i) {
        ((*dataset.labels)[i] == 0 ? label0 : label1).push_back(i);
    }
    if (label0.size() < 4) throw ArgumentError("benchmark: need at least 4 label-0 rows");
    if (label1.empty()) throw ArgumentError("benchmark: dataset has no label-1 rows");
    const double beta = config.beta.value_or(2.0);
    const std::size_t n0 = label0.size() / 2;

    DatasetResult result{std::string(name), {}};
    for (std::size_t e = 0; e < config.eps_list.size(); ++e) {
        const double eps = config.eps_list[e];
        EpsResult er;
        er.eps = eps;
        er.n_train = n0;
        er.n_test = label0.size() - n0;
        er.n_contaminants =
            static_cast<std::size_t>(std::llround(eps / (1.0 - eps) * static_cast<double>(n0)));
        if (er.n_contaminants > label1.size()) {
            er.available = false;
            er.note = "needs " + std::to_string(er.n_contaminants) + " label-1 rows, dataset has " +
                      std::to_string(label1.size());
            result.eps.push_back(std::move(er));
            continue;
        }
        CellCollector collect;
        for (std::size_t s = 0; s < config.n_seeds; ++s) {
            std::mt19937_64 rng = cell_rng(config.master_seed, e * config.n_seeds + s);
            std::vector<std::size_t> perm0 = label0;
            std::shuffle(perm0.begin(), perm0.end(), rng);
            std::vector<std::size_t> perm1 = label1;
            std::shuffle(perm1.begin(), perm1.end(), rng);
            const std::uint64_t kl_seed = rng();

            std::vector<std::size_t> train_idx(perm0.begin(), perm0.begin() + static_cast<std::ptrdiff_t>(n0));
            train_idx.insert(train_idx.end(), perm1.begin(),
                             perm1.begin() + static_cast<std::ptrdiff_t>(er.n_contaminants));
            const std::vector<std::size_t> test_idx(perm0.begin() + static_cast<std::ptrdiff_t>(n0), perm0.end());
            const Matrix train = take_rows(scaled, train_idx);
            const Matrix test = take_rows(scaled, test_idx);

            const double sigma = config.sigma ? *config.sigma
                                              : loocv_bandwidth(train, config.sigma_grid, config.family);
            er.sigmas.push_back(sigma);
            const KernelSpec kernel(config.family, train.cols(), sigma);
            const WeightedDensityEstimate reference = reference_density(test, config.sigma_grid);

            for (Method m : config.methods) {
                const std::string key(to_string(m));
                FittedMethod fit = fit_method(m, train, kernel, beta, config);
                const KlEstimate fwd = kl_fhat_to_f0(fit.estimate, reference, kl_seed);
                const KlEstimate rev = kl_f0_to_fhat(fit.estimate, test);
                collect.values[key]["kl_fhat_f0"].push_back(fwd.value);
                collect.values[key]["kl_f0_fhat"].push_back(rev.value);
                collect.clamped[key] += fwd.clamped + rev.clamped;
                if (!fit.converged) ++collect.not_converged[key];
            }
        }
        collect.finish(er);
        result.eps.push_back(std::move(er));
    }
    return result;
}

DatasetResult synthetic_run(const ContaminationSpec& spec, const BenchmarkConfig& config) {
    validate_config(config);
    spec.validate();
    const bool tabulate = spec.target.dim() <= 2 && !spec.grid.origin.empty();
    std::optional<GridDensity> f_tar;
    if (tabulate) f_tar = grid_truth(spec).f_tar;

    DatasetResult result{spec.name, {}};
    for (std::size_t e = 0; e < config.eps_list.size(); ++e) {
        const double eps = config.eps_list[e];
        const double beta = config.beta.value_or(1.0 / (1.0 - eps));
        EpsResult er;
        er.eps = eps;
        er.n_train = spec.n;
        er.n_test = spec.n;
        CellCollector collect;
        for (std::size_t s = 0; s < config.n_seeds; ++s) {
            std::mt19937_64 rng = cell_rng(config.master_seed, e * config.n_seeds + s);
            ContaminationSpec train_spec = spec;
            train_spec.eps = eps;
            train_spec.seed = rng();
            ContaminationSpec test_spec = spec;
            test_spec.eps = 0.0;
            test_spec.seed = rng();
            const std::uint64_t kl_seed = rng();

            const auto draws = sample_mixture(train_spec);
            for (const auto& d : draws) er.n_contaminants += d.source == Source::Contaminant;
            const Matrix train = sample_points(draws);
            const Matrix test = sample_points(sample_mixture(test_spec));

            const double sigma = config.sigma ? *config.sigma
                                              : loocv_bandwidth(train, config.sigma_grid, config.family);
            er.sigmas.push_back(sigma);
            const KernelSpec kernel(config.family, train.cols(), sigma);
            const WeightedDensityEstimate reference = reference_density(test, config.sigma_grid);

            for (Method m : config.methods) {
                const std::string key(to_string(m));
                FittedMethod fit = fit_method(m, train, kernel, beta, config);
                const KlEstimate fwd = kl_fhat_to_f0(fit.estimate, reference, kl_seed);
                const KlEstimate rev = kl_f0_to_fhat(fit.estimate, test);
                auto& v = collect.values[key];
                v["kl_fhat_f0"].push_back(fwd.value);
                v["kl_f0_fhat"].push_back(rev.value);
                collect.clamped[key] += fwd.clamped + rev.clamped;
                if (!fit.converged) ++collect.not_converged[key];
                if (tabulate) {
                    const GridEstimate g =
                        grid_from_estimate(fit.estimate, spec.grid.origin, spec.grid.shape, spec.grid.h);
                    v["l1"].push_back(lp_distance(g.grid, *f_tar, 1));
                    v["l2"].push_back(lp_distance(g.grid, *f_tar, 2));
                }
            }
        }
        // Average contaminant count per seed.
        er.n_contaminants = static_cast<std::size_t>(std::llround(
            static_cast<double>(er.n_contaminants) / static_cast<double>(config.n_seeds)));
        collect.finish(er);
        result.eps.push_back(std::move(er));
    }
    return result;
}

std::string ExperimentReport::to_json() const {
    using nlohmann::json;
    json results = json::object();
    json cells = json::object();
    for (const auto& ds : datasets) {
        for (const auto& er : ds.eps) {
            const std::string ek = eps_key(er.eps);
            json cell = {{"available", er.available},
                         {"note", er.note},
                         {"n_train", er.n_train},
                         {"n_contaminants", er.n_contaminants},
                         {"n_test", er.n_test},
                         {"sigmas", er.sigmas}};
            json per_method = json::object();
            for (const auto& [method, mr] : er.methods) {
                json metrics = json::object();
                for (const auto& [metric, summary] : mr.metrics) {
                    metrics[metric] = {{"mean", summary.mean},
                                       {"std", summary.std},
                                       {"values", summary.values}};
                }
                per_method[method] = std::move(metrics);
                cell["clamped"][method] = mr.clamped;
                cell["not_converged"][method] = mr.not_converged;
            }
            results[ds.dataset][ek] = std::move(per_method);
            cells[ds.dataset][ek] = std::move(cell);
        }
    }
    json root = {{"results", std::move(results)}, {"cells", std::move(cells)}};
    return root.dump(2) + "\n";
}

void ExperimentReport::write_csv(std::ostream& out) const {
    out << "dataset,eps,method,metric,mean,std,n_seeds\n";
    for (const auto& ds : datasets) {
        for (const auto& er : ds.eps) {
            for (const auto& [method, mr] : er.methods) {
                for (const auto& [metric, s] : mr.metrics) {
                    out << ds.dataset << ',' << format_double(er.eps) << ',' << method << ','
                        << metric << ',' << format_double(s.mean) << ',' << format_double(s.std)
                        << ',' << s.values.size() << '\n';
                }
            }
        }
    }
}

ExperimentReport read_report_csv(std::istream& in, std::string_view source) {
    auto fail = [&](std::size_t line, const std::string& msg) {
        throw ArgumentError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
    };
    std::string line;
    if (!std::getline(in, line)) fail(1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "dataset,eps,method,metric,mean,std,n_seeds" &&
        !line.starts_with("dataset,eps,method,metric,mean")) {
        fail(1, "expected header dataset,eps,method,metric,mean[,std,n_seeds]");
    }
    ExperimentReport report;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() < 5) fail(line_no, "expected at least 5 fields");
        double eps = 0.0;
        MetricSummary s;
        try {
            eps = parse_double(f[1]);
            s.mean = parse_double(f[4]);
            if (f.size() > 5) s.std = parse_double(f[5]);
        } catch (const ArgumentError& e) {
            fail(line_no, e.what());
        }
        const std::string ds(f[0]);
        auto dit = std::find_if(report.datasets.begin(), report.datasets.end(),
                                [&](const DatasetResult& d) { return d.dataset == ds; });
        if (dit == report.datasets.end()) {
            report.datasets.push_back({ds, {}});
            dit = std::prev(report.datasets.end());
        }
        auto eit = std::find_if(dit->eps.begin(), dit->eps.end(),
                                [&](const EpsResult& r) { return r.eps == eps; });
        if (eit == dit->eps.end()) {
            dit->eps.push_back(EpsResult{});
            eit = std::prev(dit->eps.end());
            eit->eps = eps;
        }
        eit->methods[std::string(f[2])].metrics[std::string(f[3])] = std::move(s);
    }
    return report;
}

std::vector<WilcoxonRow> compare_methods(const std::vector<DatasetResult>& datasets,
                                         std::string_view method_a, std::string_view method_b,
                                         std::string_view metric) {
    std::set<double> eps_values;
    for (const auto& ds : datasets) {
        for (const auto& er : ds.eps) {
            if (er.available) eps_values.insert(er.eps);
        }
    }
    std::vector<WilcoxonRow> rows;
    for (double eps : eps_values) {
        std::vector<double> a;
        std::vector<double> b;
        for (const auto& ds : datasets) {
            for (const auto& er : ds.eps) {
                if (er.eps != eps || !er.available) continue;
                const auto ma = er.methods.find(std::string(method_a));
                const auto mb = er.methods.find(std::string(method_b));
                if (ma == er.methods.end() || mb == er.methods.end()) continue;
                const auto va = ma->second.metrics.find(std::string(metric));
                const auto vb = mb->second.metrics.find(std::string(metric));
                if (va == ma->second.metrics.end() || vb == mb->second.metrics.end()) continue;
                a.push_back(va->second.mean);
                b.push_back(vb->second.mean);
            }
        }
        if (a.empty()) continue;
        rows.push_back({eps, wilcoxon_signed_rank(a, b)});
    }
    return rows;
}

void write_wilcoxon_csv(std::ostream& out, std::span<const WilcoxonRow> rows) {
    out << "eps,R1,R2,p,n_effective,exact\n";
    for (const auto& r : rows) {
        out << format_double(r.eps) << ',' << format_double(r.result.r1) << ','
            << format_double(r.result.r2) << ',' << format_double(r.result.p_value) << ','
            << r.result.n_effective << ',' << (r.result.exact ? "true" : "false") << '\n';
    }
}

}  // namespace spkde
