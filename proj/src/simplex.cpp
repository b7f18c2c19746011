#include "spkde/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "spkde/error.hpp"
#include "spkde/kernels.hpp"

namespace spkde {

void project_simplex_inplace(std::span<double> v, std::vector<double>& scratch) {
    if (v.empty()) throw ArgumentError("project_simplex: empty vector");
    for (double x : v) {
        if (!std::isfinite(x)) throw ArgumentError("project_simplex: non-finite entry");
    }
    if (on_simplex(v)) return;

    scratch.assign(v.begin(), v.end());
    std::stable_sort(scratch.begin(), scratch.end(), std::greater<>());

    double prefix = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < scratch.size(); ++k) {
        prefix += scratch[k];
        const double candidate = (prefix - 1.0) / static_cast<double>(k + 1);
        if (scratch[k] - candidate > 0.0) theta = candidate;
    }
    for (double& x : v) x = std::max(x - theta, 0.0);
}

std::vector<double> project_simplex(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    std::vector<double> scratch;
    project_simplex_inplace(out, scratch);
    return out;
}

}  // namespace spkde
