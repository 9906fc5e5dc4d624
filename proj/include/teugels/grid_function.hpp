#pragma once

#include <limits>
#include <vector>

namespace teugels {

/// Uniform grid x_min = x_0 < ... < x_{n-1} = x_max.
struct SpatialGrid {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_nodes = 3;

    SpatialGrid() = default;
    SpatialGrid(double lo, double hi, int n);

    double h() const { return (x_max - x_min) / static_cast<double>(n_nodes - 1); }
    double x(int i) const { return i == n_nodes - 1 ? x_max : x_min + h() * static_cast<double>(i); }
    std::vector<double> nodes() const;
};

/// Values of one time slice on a grid, evaluable everywhere.
///
/// Inside the grid: piecewise-linear interpolation. Outside: linear extension
/// from the end node with a stored slope, taken from the end cell and clamped
/// to +-slope_bound, so the extension is globally Lipschitz. The slopes are
/// part of the object; changing `values` afterwards keeps them fixed, which
/// keeps evaluation monotone in the nodal values.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(SpatialGrid grid, std::vector<double> values,
                 double slope_bound = std::numeric_limits<double>::infinity());

    const SpatialGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double slope_left() const { return slope_left_; }
    double slope_right() const { return slope_right_; }

    double operator()(double x) const;
    double at(int i) const { return values_[static_cast<std::size_t>(i)]; }

private:
    SpatialGrid grid_;
    std::vector<double> values_;
    double slope_left_ = 0.0;
    double slope_right_ = 0.0;
};

} // namespace teugels
