#include "spkde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "spkde/error.hpp"
#include "spkde/io.hpp"

namespace spkde {

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 64;
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

GridDensity::GridDensity(std::vector<double> origin, std::vector<double> cell,
                         std::vector<std::size_t> shape, std::vector<double> values)
    : origin_(std::move(origin)), cell_(std::move(cell)), shape_(std::move(shape)),
      values_(std::move(values)) {
    const std::size_t d = shape_.size();
    if (d != 1 && d != 2) throw UnsupportedError("GridDensity: only 1-D and 2-D grids are supported");
    if (origin_.size() != d || cell_.size() != d) {
        throw ArgumentError("GridDensity: origin/cell/shape dimensions disagree");
    }
    std::size_t count = 1;
    for (std::size_t j = 0; j < d; ++j) {
        if (shape_[j] == 0) throw ArgumentError("GridDensity: empty axis");
        if (!(cell_[j] > 0.0) || !std::isfinite(cell_[j])) {
            throw ArgumentError("GridDensity: cell size must be positive");
        }
        count *= shape_[j];
    }
    if (values_.size() != count) throw ArgumentError("GridDensity: value count does not match shape");
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ArgumentError("GridDensity: values must be finite and nonnegative");
        }
    }
}

GridDensity GridDensity::tabulate(std::vector<double> origin, std::vector<double> cell,
                                  std::vector<std::size_t> shape,
                                  const std::function<double(std::span<const double>)>& f) {
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    GridDensity g(std::move(origin), std::move(cell), std::move(shape),
                  std::vector<double>(count, 0.0));
    const Matrix c = g.centers();
    for (std::size_t k = 0; k < count; ++k) {
        const double v = f(c.row(k));
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ArgumentError("GridDensity::tabulate: function returned a negative or non-finite value");
        }
        g.values_[k] = v;
    }
    return g;
}

double GridDensity::cell_volume() const noexcept {
    double v = 1.0;
    for (double h : cell_) v *= h;
    return v;
}

double GridDensity::mass() const { return pairwise_sum(values_) * cell_volume(); }

double GridDensity::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

Matrix GridDensity::centers() const {
    Matrix c(size(), dim());
    if (dim() == 1) {
        for (std::size_t i = 0; i < shape_[0]; ++i) {
            c(i, 0) = origin_[0] + (static_cast<double>(i) + 0.5) * cell_[0];
        }
    } else {
        for (std::size_t i = 0; i < shape_[0]; ++i) {
            for (std::size_t j = 0; j < shape_[1]; ++j) {
                const std::size_t k = i * shape_[1] + j;
                c(k, 0) = origin_[0] + (static_cast<double>(i) + 0.5) * cell_[0];
                c(k, 1) = origin_[1] + (static_cast<double>(j) + 0.5) * cell_[1];
            }
        }
    }
    return c;
}

GridDensity GridDensity::normalized() const {
    const double m = mass();
    if (!(m > 0.0)) throw ArgumentError("GridDensity::normalized: zero mass");
    GridDensity g = *this;
    for (double& v : g.values_) v /= m;
    return g;
}

bool GridDensity::same_grid(const GridDensity& other) const noexcept {
    if (shape_ != other.shape_) return false;
    for (std::size_t j = 0; j < dim(); ++j) {
        const double scale = std::max({1.0, std::abs(origin_[j]), std::abs(cell_[j])});
        if (std::abs(origin_[j] - other.origin_[j]) > 1e-12 * scale) return false;
        if (std::abs(cell_[j] - other.cell_[j]) > 1e-12 * cell_[j]) return false;
    }
    return true;
}

namespace {

void require_same_grid(const GridDensity& f, const GridDensity& g, const char* op) {
    if (!f.same_grid(g)) throw ArgumentError(std::string(op) + ": densities live on different grids");
}

void require_normalized(const GridDensity& f, const char* op) {
    if (std::abs(f.mass() - 1.0) > 1e-8) {
        throw ArgumentError(std::string(op) + ": input density must have unit mass (within 1e-8)");
    }
}

}  // namespace

double sliced_mass(const GridDensity& f, double beta, double alpha) {
    std::vector<double> cut(f.size());
    const auto v = f.values();
    for (std::size_t k = 0; k < cut.size(); ++k) cut[k] = std::max(beta * v[k] - alpha, 0.0);
    return pairwise_sum(cut) * f.cell_volume();
}

SliceResult slice_transform(const GridDensity& f, double beta, double tol) {
    if (!(beta > 1.0) || !std::isfinite(beta)) throw ArgumentError("slice_transform: beta must exceed 1");
    if (!(tol > 0.0)) throw ArgumentError("slice_transform: tol must be positive");
    require_normalized(f, "slice_transform");

    // m(0) = beta > 1 and m(beta max f) = 0; m is continuous and nonincreasing.
    double lo = 0.0;
    double hi = beta * f.max_value();
    if (!(sliced_mass(f, beta, lo) > 1.0) || !(sliced_mass(f, beta, hi) < 1.0)) {
        throw InternalError("slice_transform: mass function does not bracket 1");
    }
    constexpr std::size_t kMaxSteps = 200;
    double alpha = 0.5 * (lo + hi);
    double m = sliced_mass(f, beta, alpha);
    std::size_t steps = 1;
    while (std::abs(m - 1.0) > tol) {
        if (steps >= kMaxSteps) {
            throw NumericError("slice_transform: bisection did not reach tol in 200 steps");
        }
        (m > 1.0 ? lo : hi) = alpha;
        alpha = 0.5 * (lo + hi);
        m = sliced_mass(f, beta, alpha);
        ++steps;
    }

    std::vector<double> out(f.size());
    const auto v = f.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(beta * v[k] - alpha, 0.0);
    GridDensity sliced(f.origin(), f.cell(), f.shape(), std::move(out));
    const double mass_error = std::abs(sliced.mass() - 1.0);
    return {alpha, std::move(sliced), mass_error, steps};
}

SliceResult decontaminate(const GridDensity& f_obs, double eps, double tol) {
    if (!(eps >= 0.0 && eps < 1.0)) throw ArgumentError("decontaminate: eps must lie in [0, 1)");
    if (eps == 0.0) {
        require_normalized(f_obs, "decontaminate");
        return {0.0, f_obs, std::abs(f_obs.mass() - 1.0), 0};
    }
    return slice_transform(f_obs, 1.0 / (1.0 - eps), tol);
}

GridDensity mix(const GridDensity& f_tar, const GridDensity& f_con, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw ArgumentError("mix: eps must lie in [0, 1]");
    require_same_grid(f_tar, f_con, "mix");
    std::vector<double> out(f_tar.size());
    const auto t = f_tar.values();
    const auto c = f_con.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - eps) * t[k] + eps * c[k];
    return {f_tar.origin(), f_tar.cell(), f_tar.shape(), std::move(out)};
}

AssumptionAWitness check_assumption_a(const GridDensity& f_tar, const GridDensity& f_con,
                                      double tol) {
    require_same_grid(f_tar, f_con, "check_assumption_a");
    const auto t = f_tar.values();
    const auto c = f_con.values();
    AssumptionAWitness w;
    std::vector<double> on_support;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] > tol) on_support.push_back(c[k]);
    }
    if (on_support.empty()) return w;
    w.level = pairwise_sum(on_support) / static_cast<double>(on_support.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const bool bad = t[k] > tol ? std::abs(c[k] - w.level) > tol : c[k] > w.level + tol;
        if (bad) w.violations.push_back(k);
    }
    w.holds = w.violations.empty();
    return w;
}

GridEstimate grid_from_estimate(const WeightedDensityEstimate& est, std::vector<double> origin,
                                std::vector<std::size_t> shape, double h, bool renormalize) {
    const std::size_t d = est.dim();
    if (d > 2) throw UnsupportedError("grid_from_estimate: only 1-D and 2-D estimates can be tabulated");
    if (origin.size() != d || shape.size() != d) {
        throw ArgumentError("grid_from_estimate: grid dimension does not match the estimate");
    }
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    GridDensity grid(origin, std::vector<double>(d, h), shape, std::vector<double>(count, 0.0));
    std::vector<double> values = est.eval(grid.centers());
    grid = GridDensity(std::move(origin), std::vector<double>(d, h), std::move(shape),
                       std::move(values));

    GridEstimate out{grid, grid.mass(), false};
    const double reach = 6.0 * est.kernel().bandwidth();
    const Matrix& pts = est.points();
    for (std::size_t j = 0; j < d; ++j) {
        double lo = pts(0, j);
        double hi = pts(0, j);
        for (std::size_t i = 1; i < pts.rows(); ++i) {
            lo = std::min(lo, pts(i, j));
            hi = std::max(hi, pts(i, j));
        }
        const double g_lo = grid.origin()[j];
        const double g_hi = g_lo + static_cast<double>(grid.shape()[j]) * h;
        if (g_lo > lo - reach || g_hi < hi + reach) out.mass_warning = true;
    }
    if (out.mass < 0.99) out.mass_warning = true;
    if (renormalize) out.grid = out.grid.normalized();
    return out;
}

double lp_distance(const GridDensity& f, const GridDensity& g, int p) {
    if (p != 1 && p != 2) throw ArgumentError("lp_distance: p must be 1 or 2");
    require_same_grid(f, g, "lp_distance");
    std::vector<double> diff(f.size());
    const auto a = f.values();
    const auto b = g.values();
    for (std::size_t k = 0; k < diff.size(); ++k) {
        const double d = std::abs(a[k] - b[k]);
        diff[k] = p == 1 ? d : d * d;
    }
    const double integral = pairwise_sum(diff) * f.cell_volume();
    return p == 1 ? integral : std::sqrt(integral);
}

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (j > 0) s += ',';
        if constexpr (std::is_floating_point_v<T>) {
            s += format_double(v[j]);
        } else {
            s += std::to_string(v[j]);
        }
    }
    return s;
}

}  // namespace

void write_grid_csv(std::ostream& out, const GridDensity& grid) {
    out << "# dim=" << grid.dim() << " origin=" << join(grid.origin()) << " cell=" << join(grid.cell())
        << " shape=" << join(grid.shape()) << '\n';
    const auto v = grid.values();
    if (grid.dim() == 1) {
        out << "i,value\n";
        for (std::size_t i = 0; i < v.size(); ++i) out << i << ',' << format_double(v[i]) << '\n';
    } else {
        out << "i,j,value\n";
        const std::size_t ny = grid.shape()[1];
        for (std::size_t k = 0; k < v.size(); ++k) {
            out << k / ny << ',' << k % ny << ',' << format_double(v[k]) << '\n';
        }
    }
}

GridDensity read_grid_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("# ")) {
        throw ArgumentError("grid CSV: missing '# dim=... origin=... cell=... shape=...' line");
    }
    std::vector<double> origin, cell;
    std::vector<std::size_t> shape;
    std::size_t dim = 0;
    std::istringstream meta(line.substr(2));
    std::string token;
    while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw ArgumentError("grid CSV: malformed metadata '" + token + "'");
        const std::string key = token.substr(0, eq);
        const auto parts = split(std::string_view(token).substr(eq + 1), ',');
        if (key == "dim") {
            dim = static_cast<std::size_t>(parse_double(parts.at(0)));
        } else if (key == "origin") {
            for (auto p : parts) origin.push_back(parse_double(p));
        } else if (key == "cell") {
            for (auto p : parts) cell.push_back(parse_double(p));
        } else if (key == "shape") {
            for (auto p : parts) shape.push_back(static_cast<std::size_t>(parse_double(p)));
        }
    }
    if (dim != shape.size()) throw ArgumentError("grid CSV: dim does not match shape");
    std::getline(in, line);  // header row
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    std::vector<double> values(count, 0.0);
    std::size_t line_no = 2;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line, ',');
        if (f.size() != dim + 1) {
            throw ArgumentError("grid CSV line " + std::to_string(line_no) + ": wrong field count");
        }
        std::size_t k = static_cast<std::size_t>(parse_double(f[0]));
        if (dim == 2) k = k * shape[1] + static_cast<std::size_t>(parse_double(f[1]));
        if (k >= count) {
            throw ArgumentError("grid CSV line " + std::to_string(line_no) + ": cell index out of range");
        }
        values[k] = parse_double(f.back());
        ++seen;
    }
    if (seen != count) throw ArgumentError("grid CSV: expected " + std::to_string(count) + " cells");
    return {std::move(origin), std::move(cell), std::move(shape), std::move(values)};
}

}  // namespace spkde
