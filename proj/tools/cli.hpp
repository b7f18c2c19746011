#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkde/kernels.hpp"

namespace spkde::cli {

/// Every flag of every subcommand, as parsed. Unset optionals are stored as
/// null in the serialized form so that parsing and serializing round-trip.
struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    std::string out;
    std::string kernel = "gaussian";
    std::optional<double> sigma;
    std::string sigma_grid = "0.01:3:30";
    std::optional<double> beta;
    std::vector<double> eps;
    std::optional<double> grid_h;

    // fit
    std::vector<std::string> data;
    std::string method = "spkde";
    std::string solver = "mnp";
    double tol = 1e-10;
    std::uint64_t max_iter = 50000;
    double reject_fraction = 0.1;

    // synth / eval / oracle
    std::string scenario;
    std::optional<std::uint64_t> n;
    std::string target;
    std::string contaminant;

    // eval
    std::vector<std::string> methods;
    std::uint64_t seeds = 1;
    std::string wilcoxon;
    std::string means;

    // oracle
    std::string grid;
    std::string truth;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// lo:hi:count -> count log-spaced bandwidths.
std::vector<double> parse_sigma_grid(const std::string& text);

struct LoadedModel {
    WeightedDensityEstimate estimate;
    std::string method;
    bool converged = true;
};

/// Reads a model file written by `fit`.
LoadedModel load_model(const std::string& path);

/// Entry point: returns the process exit code (0 ok, 2 usage or input error,
/// 3 numeric failure).
int run(int argc, char** argv);

}  // namespace spkde::cli
