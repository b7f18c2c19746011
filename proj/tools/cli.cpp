#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spkde/contamination.hpp"
#include "spkde/error.hpp"
#include "spkde/evaluation.hpp"
#include "spkde/grid.hpp"
#include "spkde/io.hpp"
#include "spkde/spkde.hpp"

namespace spkde::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace

json to_json(const RunConfig& c) {
    return {{"command", c.command},
            {"seed", c.seed},
            {"out", c.out},
            {"kernel", c.kernel},
            {"sigma", opt_json(c.sigma)},
            {"sigma_grid", c.sigma_grid},
            {"beta", opt_json(c.beta)},
            {"eps", c.eps},
            {"grid_h", opt_json(c.grid_h)},
            {"data", c.data},
            {"method", c.method},
            {"solver", c.solver},
            {"tol", c.tol},
            {"max_iter", c.max_iter},
            {"reject_fraction", c.reject_fraction},
            {"scenario", c.scenario},
            {"n", opt_json(c.n)},
            {"target", c.target},
            {"contaminant", c.contaminant},
            {"methods", c.methods},
            {"seeds", c.seeds},
            {"wilcoxon", c.wilcoxon},
            {"means", c.means},
            {"grid", c.grid},
            {"truth", c.truth}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.out = j.at("out").get<std::string>();
    c.kernel = j.at("kernel").get<std::string>();
    c.sigma = opt_from<double>(j, "sigma");
    c.sigma_grid = j.at("sigma_grid").get<std::string>();
    c.beta = opt_from<double>(j, "beta");
    c.eps = j.at("eps").get<std::vector<double>>();
    c.grid_h = opt_from<double>(j, "grid_h");
    c.data = j.at("data").get<std::vector<std::string>>();
    c.method = j.at("method").get<std::string>();
    c.solver = j.at("solver").get<std::string>();
    c.tol = j.at("tol").get<double>();
    c.max_iter = j.at("max_iter").get<std::uint64_t>();
    c.reject_fraction = j.at("reject_fraction").get<double>();
    c.scenario = j.at("scenario").get<std::string>();
    c.n = opt_from<std::uint64_t>(j, "n");
    c.target = j.at("target").get<std::string>();
    c.contaminant = j.at("contaminant").get<std::string>();
    c.methods = j.at("methods").get<std::vector<std::string>>();
    c.seeds = j.at("seeds").get<std::uint64_t>();
    c.wilcoxon = j.at("wilcoxon").get<std::string>();
    c.means = j.at("means").get<std::string>();
    c.grid = j.at("grid").get<std::string>();
    c.truth = j.at("truth").get<std::string>();
    return c;
}

std::vector<double> parse_sigma_grid(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ArgumentError("--sigma-grid expects lo:hi:count, got '" + text + "'");
    const double lo = parse_double(parts[0]);
    const double hi = parse_double(parts[1]);
    const double count = parse_double(parts[2]);
    if (!(count >= 1.0) || count != std::floor(count)) {
        throw ArgumentError("--sigma-grid count must be a positive integer");
    }
    return log_spaced(lo, hi, static_cast<std::size_t>(count));
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ArgumentError("failed writing '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path out(cfg.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ArgumentError("cannot create output directory '" + cfg.out + "': " + ec.message());
    write_text(out / "config.json", dump(to_json(cfg)));
    return out;
}

void write_grid(const fs::path& path, const GridDensity& g) {
    std::ostringstream s;
    write_grid_csv(s, g);
    write_text(path, s.str());
}

GridDensity read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open grid file '" + path + "'");
    return read_grid_csv(in);
}

std::vector<double> parse_numbers(std::string_view text, char sep, const char* what) {
    std::vector<double> out;
    for (auto p : split(text, sep)) {
        try {
            out.push_back(parse_double(p));
        } catch (const ArgumentError&) {
            throw ArgumentError(std::string(what) + ": cannot parse '" + std::string(p) + "'");
        }
    }
    return out;
}

/// Named scenario, or an inline 1-D mixture: --target w:mu:sd[,w:mu:sd...]
/// truncated to the --contaminant lo:hi box, which is also the uniform contaminant.
ContaminationSpec scenario_from(const RunConfig& cfg) {
    ContaminationSpec spec;
    if (!cfg.target.empty()) {
        const auto box = parse_numbers(cfg.contaminant.empty() ? "-2:2" : cfg.contaminant, ':',
                                       "--contaminant");
        if (box.size() != 2) throw ArgumentError("--contaminant expects lo:hi");
        std::vector<GaussianComponent> comps;
        for (auto part : split(cfg.target, ',')) {
            const auto v = parse_numbers(part, ':', "--target");
            if (v.size() != 3) throw ArgumentError("--target components are weight:mean:sd");
            comps.push_back({v[0], {v[1]}, {v[2]}});
        }
        const Box b{{box[0]}, {box[1]}};
        spec.name = "custom";
        spec.target = Distribution::gaussian_mixture(std::move(comps), b);
        spec.contaminant = Distribution::uniform_box(b);
        spec.eps = 0.2;
        spec.n = 500;
        spec.beta = 1.25;
        const double h = 1e-3;
        const double lo = box[0] - 2.0;
        const double hi = box[1] + 2.0;
        spec.grid = {{lo}, {static_cast<std::size_t>(std::llround((hi - lo) / h))}, h};
    } else {
        spec = named_scenario(cfg.scenario.empty() ? "fig4" : cfg.scenario);
    }
    if (cfg.eps.size() > 1) throw ArgumentError("this command takes a single --eps value");
    if (cfg.eps.size() == 1) {
        spec.eps = cfg.eps[0];
        if (spec.eps < 1.0) spec.beta = 1.0 / (1.0 - spec.eps);
    }
    if (cfg.n) spec.n = static_cast<std::size_t>(*cfg.n);
    if (cfg.grid_h) {
        const double h = *cfg.grid_h;
        if (!(h > 0.0)) throw ArgumentError("--grid-h must be positive");
        for (std::size_t j = 0; j < spec.grid.shape.size(); ++j) {
            const double extent = static_cast<double>(spec.grid.shape[j]) * spec.grid.h;
            spec.grid.shape[j] = static_cast<std::size_t>(std::llround(extent / h));
            if (spec.grid.shape[j] == 0) throw ArgumentError("--grid-h is larger than the grid");
        }
        spec.grid.h = h;
    }
    spec.seed = cfg.seed;
    spec.validate();
    return spec;
}

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions o;
    if (cfg.solver == "mnp") {
        o.method = SolverMethod::MinNormPoint;
    } else if (cfg.solver == "pgd") {
        o.method = SolverMethod::ProjectedGradient;
    } else {
        throw ArgumentError("unknown --solver '" + cfg.solver + "' (expected mnp or pgd)");
    }
    if (!(cfg.tol > 0.0)) throw ArgumentError("--tol must be positive");
    if (cfg.max_iter < 1) throw ArgumentError("--max-iter must be >= 1");
    o.tol = cfg.tol;
    o.max_iter = static_cast<std::size_t>(cfg.max_iter);
    return o;
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    }
    return rows;
}

int cmd_fit(const RunConfig& cfg) {
    if (cfg.data.size() != 1) throw ArgumentError("fit needs exactly one --data file");
    const Dataset data = read_dataset_csv_file(cfg.data[0]);
    const KernelFamily family = parse_kernel_family(cfg.kernel);
    const Matrix& x = data.features;
    const double sigma = cfg.sigma ? *cfg.sigma
                                   : loocv_bandwidth(x, parse_sigma_grid(cfg.sigma_grid), family);
    const KernelSpec kernel(family, x.cols(), sigma);
    const Method method = parse_method(cfg.method);
    const SolverOptions options = solver_options(cfg);
    const fs::path out = prepare_out(cfg);

    json model;
    model["method"] = cfg.method;
    model["feature_names"] = data.feature_names;
    model["kernel"] = {{"family", std::string(to_string(family))},
                       {"dim", x.cols()},
                       {"bandwidth", sigma}};
    model["solve"] = nullptr;
    model["rejected"] = nullptr;
    model["beta"] = nullptr;
    bool converged = true;
    std::optional<WeightedDensityEstimate> est;
    switch (method) {
        case Method::Kde: est = fit_kde(x, kernel); break;
        case Method::Spkde: {
            const double beta = cfg.beta.value_or(2.0);
            SpkdeFit fit = fit_spkde(x, kernel, beta, options);
            converged = fit.report.converged;
            model["beta"] = beta;
            model["solve"] = {{"solver", cfg.solver},
                              {"tol", options.tol},
                              {"iterations", fit.report.iterations},
                              {"converged", fit.report.converged},
                              {"kkt_residual", fit.report.kkt_residual},
                              {"objective", fit.report.objective()},
                              {"objective_trace", fit.report.objective_trace}};
            est = std::move(fit.estimate);
            break;
        }
        case Method::RejKde: {
            RejKdeFit fit = fit_rejkde(x, kernel, cfg.reject_fraction);
            model["rejected"] = fit.rejected;
            est = std::move(fit.estimate);
            break;
        }
    }
    model["converged"] = converged;
    model["points"] = matrix_json(est->points());
    model["weights"] = std::vector<double>(est->weights().begin(), est->weights().end());
    write_text(out / "model.json", dump(model));
    if (!converged) {
        std::cerr << "warning: solver did not converge within " << options.max_iter
                  << " iterations; model written with converged=false\n";
    }
    return 0;
}

int cmd_synth(const RunConfig& cfg) {
    const ContaminationSpec spec = scenario_from(cfg);
    const fs::path out = prepare_out(cfg);
    const auto samples = sample_mixture(spec);

    std::ostringstream csv;
    const std::size_t d = spec.target.dim();
    for (std::size_t j = 0; j < d; ++j) csv << (d == 1 ? "x" : "x" + std::to_string(j + 1)) << ',';
    csv << "label\n";
    std::size_t contaminated = 0;
    for (const auto& s : samples) {
        for (double v : s.point) csv << format_double(v) << ',';
        const bool con = s.source == Source::Contaminant;
        contaminated += con;
        csv << (con ? 1 : 0) << '\n';
    }
    write_text(out / "samples.csv", csv.str());

    const GridTruth truth = grid_truth(spec);
    write_grid(out / "f_tar.csv", truth.f_tar);
    write_grid(out / "f_con.csv", truth.f_con);
    write_grid(out / "f_obs.csv", truth.f_obs);

    const json meta = {{"scenario", spec.name},
                       {"seed", spec.seed},
                       {"eps", spec.eps},
                       {"n", spec.n},
                       {"n_contaminant", contaminated},
                       {"beta", spec.beta},
                       {"target", spec.target.name()},
                       {"contaminant", spec.contaminant.name()},
                       {"grid", {{"origin", spec.grid.origin}, {"shape", spec.grid.shape}, {"h", spec.grid.h}}}};
    write_text(out / "meta.json", dump(meta));
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    std::vector<DatasetResult> datasets;
    const fs::path out = prepare_out(cfg);
    if (!cfg.means.empty()) {
        if (cfg.wilcoxon.empty()) throw ArgumentError("--means needs --wilcoxon A,B");
        std::ifstream in(cfg.means);
        if (!in) throw ArgumentError("cannot open means file '" + cfg.means + "'");
        datasets = read_report_csv(in, cfg.means).datasets;
    } else {
        BenchmarkConfig bc;
        if (!cfg.eps.empty()) bc.eps_list = cfg.eps;
        if (!cfg.methods.empty()) {
            bc.methods.clear();
            for (const auto& m : cfg.methods) bc.methods.push_back(parse_method(m));
        }
        if (cfg.seeds < 1) throw ArgumentError("--seeds must be >= 1");
        bc.n_seeds = static_cast<std::size_t>(cfg.seeds);
        bc.master_seed = cfg.seed;
        bc.family = parse_kernel_family(cfg.kernel);
        bc.sigma = cfg.sigma;
        bc.sigma_grid = parse_sigma_grid(cfg.sigma_grid);
        bc.beta = cfg.beta;
        bc.reject_fraction = cfg.reject_fraction;
        bc.solver = solver_options(cfg);
        if (!cfg.data.empty()) {
            for (const auto& path : cfg.data) {
                const Dataset data = read_dataset_csv_file(path);
                if (!data.labels) {
                    throw ArgumentError(path + ": eval needs a final 'label' column");
                }
                datasets.push_back(benchmark_run(data, fs::path(path).stem().string(), bc));
            }
        } else {
            RunConfig one = cfg;
            one.eps.clear();
            datasets.push_back(synthetic_run(scenario_from(one), bc));
        }
        ExperimentReport report{datasets};
        write_text(out / "report.json", report.to_json());
        std::ostringstream csv;
        report.write_csv(csv);
        write_text(out / "report.csv", csv.str());
    }

    if (!cfg.wilcoxon.empty()) {
        const auto pair = split(cfg.wilcoxon, ',');
        if (pair.size() != 2) throw ArgumentError("--wilcoxon expects two methods, e.g. spkde,kde");
        std::set<std::string> metrics;
        for (const auto& ds : datasets) {
            for (const auto& er : ds.eps) {
                for (const auto& [method, mr] : er.methods) {
                    for (const auto& [metric, s] : mr.metrics) metrics.insert(metric);
                }
            }
        }
        for (const auto& metric : metrics) {
            const auto rows = compare_methods(datasets, pair[0], pair[1], metric);
            std::ostringstream csv;
            write_wilcoxon_csv(csv, rows);
            write_text(out / ("wilcoxon_" + metric + ".csv"), csv.str());
            std::cout << metric << " (" << pair[0] << " vs " << pair[1] << ")\n" << csv.str();
        }
    }
    return 0;
}

int cmd_oracle(const RunConfig& cfg) {
    if (cfg.beta && !(*cfg.beta > 1.0)) throw ArgumentError("--beta must exceed 1");
    GridDensity f_obs({0.0}, {1.0}, {1}, {1.0});
    std::optional<GridDensity> truth;
    std::optional<double> eps;
    if (cfg.eps.size() > 1) throw ArgumentError("oracle takes a single --eps value");
    if (cfg.eps.size() == 1) eps = cfg.eps[0];
    if (!cfg.grid.empty()) {
        f_obs = read_grid_file(cfg.grid);
    } else {
        const ContaminationSpec spec = scenario_from(cfg);
        const GridTruth t = grid_truth(spec);
        f_obs = t.f_obs;
        truth = t.f_tar;
        if (!eps) eps = spec.eps;
    }
    if (!cfg.truth.empty()) truth = read_grid_file(cfg.truth);
    if (!cfg.beta && !eps) throw ArgumentError("oracle needs --beta or --eps");
    const fs::path out = prepare_out(cfg);

    const SliceResult r = cfg.beta ? slice_transform(f_obs, *cfg.beta) : decontaminate(f_obs, *eps);
    write_grid(out / "slice.csv", r.density);
    json report = {{"alpha", r.alpha},
                   {"beta", cfg.beta ? *cfg.beta : 1.0 / (1.0 - *eps)},
                   {"eps", opt_json(cfg.beta ? std::nullopt : eps)},
                   {"mass_error", r.mass_error},
                   {"bisection_steps", r.bisection_steps},
                   {"l1", nullptr},
                   {"l2", nullptr}};
    if (truth) {
        report["l1"] = lp_distance(r.density, *truth, 1);
        report["l2"] = lp_distance(r.density, *truth, 2);
    }
    write_text(out / "oracle.json", dump(report));
    return 0;
}

void add_shared(CLI::App* sub, RunConfig& cfg, CLI::Option*& sigma_opt, double& sigma,
                CLI::Option*& beta_opt, double& beta, CLI::Option*& grid_h_opt, double& grid_h) {
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--out", cfg.out, "Output directory")->required();
    sub->add_option("--kernel", cfg.kernel, "gaussian or cauchy")
        ->check(CLI::IsMember({"gaussian", "cauchy"}));
    sigma_opt = sub->add_option("--sigma", sigma, "Fixed bandwidth (otherwise LOOCV)");
    sub->add_option("--sigma-grid", cfg.sigma_grid, "LOOCV grid lo:hi:count (log-spaced)");
    beta_opt = sub->add_option("--beta", beta, "Robustness scale");
    sub->add_option("--eps", cfg.eps, "Contamination proportion(s)")->delimiter(',');
    grid_h_opt = sub->add_option("--grid-h", grid_h, "Grid cell size");
}

}  // namespace

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open model file '" + path + "'");
    const json j = json::parse(in);
    const auto& k = j.at("kernel");
    const KernelSpec spec(parse_kernel_family(k.at("family").get<std::string>()),
                          k.at("dim").get<std::size_t>(), k.at("bandwidth").get<double>());
    const auto rows = j.at("points").get<std::vector<std::vector<double>>>();
    Matrix points(rows.size(), spec.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != spec.dim()) throw ArgumentError("model: point dimension mismatch");
        std::copy(rows[i].begin(), rows[i].end(), points.row(i).begin());
    }
    return {WeightedDensityEstimate(std::move(points), j.at("weights").get<std::vector<double>>(), spec),
            j.at("method").get<std::string>(), j.at("converged").get<bool>()};
}

int run(int argc, char** argv) {
    CLI::App app{"Robust kernel density estimation: fit, synthesize, evaluate, oracle"};
    app.require_subcommand(1);
    RunConfig cfg;
    double sigma = 0.0, beta = 0.0, grid_h = 0.0;
    std::uint64_t n = 0;

    struct Sub {
        CLI::App* app;
        CLI::Option* sigma;
        CLI::Option* beta;
        CLI::Option* grid_h;
        CLI::Option* n = nullptr;
    };
    std::vector<Sub> subs;
    auto make = [&](const char* name, const char* help) -> Sub& {
        Sub s{app.add_subcommand(name, help), nullptr, nullptr, nullptr};
        add_shared(s.app, cfg, s.sigma, sigma, s.beta, beta, s.grid_h, grid_h);
        subs.push_back(s);
        return subs.back();
    };
    subs.reserve(4);

    Sub& fit = make("fit", "Fit kde, spkde or rejkde to a CSV and write model.json");
    fit.app->add_option("--data", cfg.data, "Input CSV")->required();
    fit.app->add_option("--method", cfg.method)->check(CLI::IsMember({"kde", "spkde", "rejkde"}));
    fit.app->add_option("--solver", cfg.solver)->check(CLI::IsMember({"mnp", "pgd"}));
    fit.app->add_option("--tol", cfg.tol);
    fit.app->add_option("--max-iter", cfg.max_iter);
    fit.app->add_option("--reject-fraction", cfg.reject_fraction);

    Sub& synth = make("synth", "Draw a contaminated sample and tabulate its ground truth");
    synth.app->add_option("--scenario", cfg.scenario, "fig4, piecewise or uniform01");
    synth.n = synth.app->add_option("--n", n, "Sample size");
    synth.app->add_option("--target", cfg.target, "Inline mixture w:mu:sd[,w:mu:sd...]");
    synth.app->add_option("--contaminant", cfg.contaminant, "Uniform contaminant lo:hi");

    Sub& eval = make("eval", "Benchmark methods and write report.json/report.csv");
    eval.app->add_option("--data", cfg.data, "Labeled CSV dataset(s)")->delimiter(',');
    eval.app->add_option("--scenario", cfg.scenario, "Synthetic scenario instead of data");
    eval.n = eval.app->add_option("--n", n, "Sample size for synthetic scenarios");
    eval.app->add_option("--target", cfg.target);
    eval.app->add_option("--contaminant", cfg.contaminant);
    eval.app->add_option("--methods", cfg.methods, "kde,spkde,rejkde")->delimiter(',');
    eval.app->add_option("--seeds", cfg.seeds, "Number of seeds per eps");
    eval.app->add_option("--solver", cfg.solver)->check(CLI::IsMember({"mnp", "pgd"}));
    eval.app->add_option("--tol", cfg.tol);
    eval.app->add_option("--max-iter", cfg.max_iter);
    eval.app->add_option("--reject-fraction", cfg.reject_fraction);
    eval.app->add_option("--wilcoxon", cfg.wilcoxon, "Compare two methods, e.g. spkde,kde");
    eval.app->add_option("--means", cfg.means, "Per-dataset means CSV to compare instead of running");

    Sub& oracle = make("oracle", "Apply the slicing transform to a grid density");
    oracle.app->add_option("--grid", cfg.grid, "Input grid CSV");
    oracle.app->add_option("--scenario", cfg.scenario);
    oracle.app->add_option("--target", cfg.target);
    oracle.app->add_option("--contaminant", cfg.contaminant);
    oracle.app->add_option("--truth", cfg.truth, "Target grid CSV for the L1 error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& s : subs) {
            if (!s.app->parsed()) continue;
            cfg.command = s.app->get_name();
            if (*s.sigma) cfg.sigma = sigma;
            if (*s.beta) cfg.beta = beta;
            if (*s.grid_h) cfg.grid_h = grid_h;
            if (s.n && *s.n) cfg.n = n;
        }
        if (cfg.command == "fit") return cmd_fit(cfg);
        if (cfg.command == "synth") return cmd_synth(cfg);
        if (cfg.command == "eval") return cmd_eval(cfg);
        if (cfg.command == "oracle") return cmd_oracle(cfg);
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed JSON input: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace spkde::cli
