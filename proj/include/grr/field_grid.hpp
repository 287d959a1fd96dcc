#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace grr {

// Scalar field sampled on a tensor-product grid in [0,1]^n, 1 <= n <= 8.
// Values are stored row-major with axis 0 slowest.
class GridField {
public:
    GridField(std::vector<std::vector<double>> axes, std::vector<double> values);

    static GridField zeros(std::vector<std::vector<double>> axes);
    static GridField from_function(std::vector<std::vector<double>> axes,
                                   const std::function<double(std::span<const double>)>& f);

    int dim() const { return static_cast<int>(axes_.size()); }
    const std::vector<double>& axis(int k) const { return axes_[static_cast<std::size_t>(k)]; }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    const std::vector<std::size_t>& strides() const { return strides_; }
    std::size_t size() const { return values_.size(); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    std::size_t flat_index(std::span<const std::size_t> idx) const;
    double at(std::span<const std::size_t> idx) const { return values_[flat_index(idx)]; }

    // exact node membership; off-grid coordinates are a domain error
    std::size_t axis_index(int k, double coord) const;
    double value_at(std::span<const double> point) const;

private:
    std::vector<std::vector<double>> axes_;
    std::vector<double> values_;
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> strides_;
};

// uniform grid {0, 1/(m-1), ..., 1} on [0,1]
std::vector<double> uniform_axis(std::size_t m);
std::vector<std::vector<double>> uniform_axes(std::span<const std::size_t> shape);

struct PointPair {
    std::vector<double> x;
    std::vector<double> y;
};

struct CornerSign {
    std::uint32_t corner;  // bit (n-1-k) set means axis k takes its y-coordinate
    int sign;              // (-1)^(number of x-coordinates selected)
};

// Signed-corner expansion of the n-fold rectangular increment; corners are
// enumerated lexicographically over axes (last axis fastest), so for n=2 the
// order is (xx, xy, yx, yy) with signs (+, -, -, +).  The all-y corner always
// carries +1, so in one dimension the increment is the plain difference
// f(y) - f(x).
std::vector<CornerSign> corner_expansion(int n);

inline bool corner_takes_y(std::uint32_t corner, int k, int n) {
    return (corner >> (n - 1 - k)) & 1u;
}

using FieldFn = std::function<double(std::span<const double>)>;

// Non-owning view unifying grid-sampled and callable fields.
class FieldView {
public:
    FieldView(const GridField& g) : grid_(&g), dim_(g.dim()) {}
    FieldView(const FieldFn& f, int dim);

    double operator()(std::span<const double> x) const;
    int dim() const { return dim_; }

private:
    const GridField* grid_ = nullptr;
    const FieldFn* fn_ = nullptr;
    int dim_;
};

// n-fold rectangular increment of f over the box spanned by (x, y): the
// alternating sum of f over the 2^n corners.
double rect_increment(const FieldView& f, const PointPair& pair);

// fast path on grid nodes given per-axis indices
double rect_increment_nodes(const GridField& f, std::span<const std::size_t> ix,
                            std::span<const std::size_t> iy);

// Splits the increment along axis k at coordinate m into the two sub-boxes;
// returns {whole, part with y_k -> m, part with x_k -> m}.  The first entry
// equals the sum of the other two up to rounding.
std::array<double, 3> split_increment(const FieldView& f, const PointPair& pair, int k, double m);

// Snapshot I/O: JSON manifest plus a sibling little-endian float64 .bin with
// the row-major values.  Writes are atomic (temp file + rename).
void write_snapshot(const GridField& f, const std::filesystem::path& json_path,
                    const nlohmann::ordered_json& metadata);
GridField read_snapshot(const std::filesystem::path& json_path,
                        nlohmann::ordered_json* metadata = nullptr);

} // namespace grr
