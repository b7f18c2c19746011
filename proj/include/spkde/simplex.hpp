#pragma once

#include <span>
#include <vector>

namespace spkde {

/// Euclidean projection onto the probability simplex {w : w >= 0, sum w = 1}.
///
/// Sort-and-threshold rule: sort descending, take the largest rho with
/// u_rho > (sum_{i<=rho} u_i - 1) / rho, shift every entry by that threshold
/// and clip at zero. Inputs already on the simplex (sum within 1e-12) are
/// returned unchanged so the projection is exactly idempotent.
///
/// Throws ArgumentError for an empty or non-finite input.
std::vector<double> project_simplex(std::span<const double> v);

/// In-place variant reusing `scratch` for the sorted copy.
void project_simplex_inplace(std::span<double> v, std::vector<double>& scratch);

}  // namespace spkde
