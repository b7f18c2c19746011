#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spkde/matrix.hpp"

namespace spkde {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Strict decimal parse of the whole field; throws ArgumentError.
double parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

/// Feature matrix plus the optional binary `label` column
/// (0 = target class, 1 = contamination).
struct Dataset {
    std::vector<std::string> feature_names;
    Matrix features;
    std::optional<std::vector<int>> labels;

    /// Rows whose label equals `label`; throws ArgumentError if unlabeled.
    Matrix rows_with_label(int label) const;
};

/// Header row, then one row per sample. A final column named `label` is
/// split off and must hold 0 or 1. Errors carry `source:line:`.
Dataset read_dataset_csv(std::istream& in, std::string_view source = "<input>");
Dataset read_dataset_csv_file(const std::string& path);

void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace spkde
