#include "spkde/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "spkde/error.hpp"

namespace spkde {

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), res.ptr};
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ArgumentError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

Matrix Dataset::rows_with_label(int label) const {
    if (!labels) throw ArgumentError("dataset has no label column");
    std::vector<double> data;
    std::size_t count = 0;
    for (std::size_t r = 0; r < features.rows(); ++r) {
        if ((*labels)[r] != label) continue;
        auto row = features.row(r);
        data.insert(data.end(), row.begin(), row.end());
        ++count;
    }
    return Matrix(count, features.cols(), std::move(data));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
    throw ArgumentError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, std::string_view source) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool labeled = false;
    std::size_t n_features = 0;
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows = 0;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto fields = split(text, ',');
        if (!have_header) {
            for (auto f : fields) ds.feature_names.emplace_back(trim(f));
            if (!ds.feature_names.empty() && ds.feature_names.back() == "label") {
                labeled = true;
                ds.feature_names.pop_back();
            }
            n_features = ds.feature_names.size();
            if (n_features == 0) fail(source, line_no, "header has no feature columns");
            have_header = true;
            continue;
        }
        const std::size_t expected = n_features + (labeled ? 1 : 0);
        if (fields.size() != expected) {
            fail(source, line_no,
                 "expected " + std::to_string(expected) + " fields, found " +
                     std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < n_features; ++j) {
            double v = 0.0;
            try {
                v = parse_double(fields[j]);
            } catch (const ArgumentError& e) {
                fail(source, line_no, e.what());
            }
            if (!std::isfinite(v)) fail(source, line_no, "non-finite value");
            values.push_back(v);
        }
        if (labeled) {
            const std::string_view lab = trim(fields.back());
            if (lab == "0") {
                labels.push_back(0);
            } else if (lab == "1") {
                labels.push_back(1);
            } else {
                fail(source, line_no, "label must be 0 or 1, found '" + std::string(lab) + "'");
            }
        }
        ++rows;
    }
    if (!have_header) throw ArgumentError(std::string(source) + ": empty input (no header row)");
    ds.features = Matrix(rows, n_features, std::move(values));
    if (labeled) ds.labels = std::move(labels);
    return ds;
}

Dataset read_dataset_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open input file '" + path + "'");
    return read_dataset_csv(in, path);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t j = 0; j < data.feature_names.size(); ++j) {
        if (j > 0) out << ',';
        out << data.feature_names[j];
    }
    if (data.labels) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < data.features.rows(); ++r) {
        for (std::size_t j = 0; j < data.features.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(data.features(r, j));
        }
        if (data.labels) out << ',' << (*data.labels)[r];
        out << '\n';
    }
}

}  // namespace spkde
