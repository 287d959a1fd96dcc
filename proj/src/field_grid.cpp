#include "grr/field_grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "snapshot sidecar format assumes a little-endian host");

namespace grr {

namespace {

constexpr double kNodeTol = 1e-12;

void validate_axes(const std::vector<std::vector<double>>& axes) {
    if (axes.empty() || axes.size() > 8)
        throw std::invalid_argument("GridField: dimension must be in [1,8]");
    for (const auto& ax : axes) {
        if (ax.empty()) throw std::invalid_argument("GridField: empty axis");
        for (std::size_t i = 0; i < ax.size(); ++i) {
            if (!(ax[i] >= 0.0 && ax[i] <= 1.0) || !std::isfinite(ax[i]))
                throw std::invalid_argument("GridField: axis coordinate outside [0,1]");
            if (i > 0 && !(ax[i] > ax[i - 1]))
                throw std::invalid_argument("GridField: axis not strictly increasing");
        }
    }
}

} // namespace

GridField::GridField(std::vector<std::vector<double>> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
    validate_axes(axes_);
    shape_.reserve(axes_.size());
    for (const auto& ax : axes_) shape_.push_back(ax.size());
    std::size_t total = 1;
    strides_.assign(axes_.size(), 0);
    for (std::size_t k = axes_.size(); k-- > 0;) {
        strides_[k] = total;
        total *= shape_[k];
    }
    if (values_.size() != total)
        throw std::invalid_argument("GridField: value count does not match grid shape");
}

GridField GridField::zeros(std::vector<std::vector<double>> axes) {
    validate_axes(axes);
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.size();
    return GridField(std::move(axes), std::vector<double>(total, 0.0));
}

GridField GridField::from_function(std::vector<std::vector<double>> axes,
                                   const std::function<double(std::span<const double>)>& f) {
    GridField g = zeros(std::move(axes));
    const int n = g.dim();
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> pt(n);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        for (int k = 0; k < n; ++k) pt[static_cast<std::size_t>(k)] = g.axis(k)[idx[static_cast<std::size_t>(k)]];
        g.mutable_values()[flat] = f(pt);
        // odometer, last axis fastest
        for (int k = n; k-- > 0;) {
            auto ku = static_cast<std::size_t>(k);
            if (++idx[ku] < g.shape()[ku]) break;
            idx[ku] = 0;
        }
    }
    return g;
}

std::size_t GridField::flat_index(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) flat += idx[k] * strides_[k];
    return flat;
}

std::size_t GridField::axis_index(int k, double coord) const {
    const auto& ax = axes_[static_cast<std::size_t>(k)];
    auto it = std::lower_bound(ax.begin(), ax.end(), coord - kNodeTol);
    if (it == ax.end() || std::fabs(*it - coord) > kNodeTol)
        throw std::domain_error("GridField: coordinate is not a grid node");
    return static_cast<std::size_t>(it - ax.begin());
}

double GridField::value_at(std::span<const double> point) const {
    if (point.size() != axes_.size())
        throw std::invalid_argument("GridField: point dimension mismatch");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < point.size(); ++k)
        flat += axis_index(static_cast<int>(k), point[k]) * strides_[k];
    return values_[flat];
}

std::vector<double> uniform_axis(std::size_t m) {
    if (m == 0) throw std::invalid_argument("uniform_axis: empty");
    std::vector<double> ax(m);
    if (m == 1) {
        ax[0] = 0.0;
        return ax;
    }
    for (std::size_t i = 0; i < m; ++i) ax[i] = static_cast<double>(i) / static_cast<double>(m - 1);
    return ax;
}

std::vector<std::vector<double>> uniform_axes(std::span<const std::size_t> shape) {
    std::vector<std::vector<double>> axes;
    axes.reserve(shape.size());
    for (std::size_t m : shape) axes.push_back(uniform_axis(m));
    return axes;
}

std::vector<CornerSign> corner_expansion(int n) {
    if (n < 1 || n > 8) throw std::invalid_argument("corner_expansion: n must be in [1,8]");
    std::vector<CornerSign> out;
    out.reserve(static_cast<std::size_t>(1) << n);
    for (std::uint32_t c = 0; c < (1u << n); ++c)
        out.push_back({c, ((n - std::popcount(c)) % 2 == 0) ? 1 : -1});
    return out;
}

FieldView::FieldView(const FieldFn& f, int dim) : fn_(&f), dim_(dim) {
    if (dim < 1 || dim > 8) throw std::invalid_argument("FieldView: dimension must be in [1,8]");
}

double FieldView::operator()(std::span<const double> x) const {
    if (grid_) return grid_->value_at(x);
    return (*fn_)(x);
}

double rect_increment(const FieldView& f, const PointPair& pair) {
    const int n = f.dim();
    if (pair.x.size() != static_cast<std::size_t>(n) || pair.y.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("rect_increment: point dimension mismatch");
    // a degenerate box has an identically zero increment; returning 0 here
    // keeps that exact where the corner sum would leave rounding residue
    for (std::size_t k = 0; k < pair.x.size(); ++k)
        if (pair.x[k] == pair.y[k]) return 0.0;
    std::vector<double> pt(static_cast<std::size_t>(n));
    double sum = 0;
    for (std::uint32_t c = 0; c < (1u << n); ++c) {
        for (int k = 0; k < n; ++k) {
            auto ku = static_cast<std::size_t>(k);
            pt[ku] = corner_takes_y(c, k, n) ? pair.y[ku] : pair.x[ku];
        }
        double v = f(pt);
        sum += ((n - std::popcount(c)) % 2 == 0) ? v : -v;
    }
    return sum;
}

double rect_increment_nodes(const GridField& f, std::span<const std::size_t> ix,
                            std::span<const std::size_t> iy) {
    const int n = f.dim();
    for (int k = 0; k < n; ++k)
        if (ix[static_cast<std::size_t>(k)] == iy[static_cast<std::size_t>(k)]) return 0.0;
    const auto& strides = f.strides();
    const auto& vals = f.values();
    double sum = 0;
    for (std::uint32_t c = 0; c < (1u << n); ++c) {
        std::size_t flat = 0;
        for (int k = 0; k < n; ++k) {
            auto ku = static_cast<std::size_t>(k);
            flat += (corner_takes_y(c, k, n) ? iy[ku] : ix[ku]) * strides[ku];
        }
        sum += ((n - std::popcount(c)) % 2 == 0) ? vals[flat] : -vals[flat];
    }
    return sum;
}

std::array<double, 3> split_increment(const FieldView& f, const PointPair& pair, int k, double m) {
    const int n = f.dim();
    if (k < 0 || k >= n) throw std::invalid_argument("split_increment: axis out of range");
    PointPair left = pair;   // x_k kept, y_k -> m
    PointPair right = pair;  // x_k -> m, y_k kept
    left.y[static_cast<std::size_t>(k)] = m;
    right.x[static_cast<std::size_t>(k)] = m;
    return {rect_increment(f, pair), rect_increment(f, left), rect_increment(f, right)};
}

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

void write_snapshot(const GridField& f, const std::filesystem::path& json_path,
                    const nlohmann::ordered_json& metadata) {
    std::filesystem::path bin_path = json_path;
    bin_path.replace_extension(".bin");

    nlohmann::ordered_json manifest;
    manifest["format"] = "gridfield/1";
    manifest["dim"] = f.dim();
    manifest["shape"] = f.shape();
    manifest["axes"] = f.axes();
    for (const auto& [key, value] : metadata.items()) manifest[key] = value;
    manifest["data"] = bin_path.filename().string();

    std::string raw(f.size() * sizeof(double), '\0');
    std::memcpy(raw.data(), f.values().data(), raw.size());
    atomic_write(bin_path, raw);
    atomic_write(json_path, manifest.dump(2) + "\n");
}

GridField read_snapshot(const std::filesystem::path& json_path, nlohmann::ordered_json* metadata) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open snapshot manifest: " + json_path.string());
    nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(in);
    if (manifest.value("format", "") != std::string("gridfield/1"))
        throw std::runtime_error("snapshot manifest has unknown format tag");

    auto axes = manifest.at("axes").get<std::vector<std::vector<double>>>();
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.size();

    std::filesystem::path bin_path = json_path.parent_path() / manifest.at("data").get<std::string>();
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open snapshot data: " + bin_path.string());
    std::vector<double> values(total);
    bin.read(reinterpret_cast<char*>(values.data()),
             static_cast<std::streamsize>(total * sizeof(double)));
    if (static_cast<std::size_t>(bin.gcount()) != total * sizeof(double))
        throw std::runtime_error("snapshot data truncated: " + bin_path.string());

    if (metadata) *metadata = manifest;
    return GridField(std::move(axes), std::move(values));
}

} // namespace grr
