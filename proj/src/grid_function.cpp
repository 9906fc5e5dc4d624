#include "teugels/grid_function.hpp"

#include <algorithm>
#include <cmath>

#include "teugels/errors.hpp"

namespace teugels {

SpatialGrid::SpatialGrid(double lo, double hi, int n) : x_min(lo), x_max(hi), n_nodes(n) {
    if (!(lo < hi)) throw ValidationError("grid: need x_min < x_max");
    if (n < 3) throw ValidationError("grid: need at least 3 nodes");
}

std::vector<double> SpatialGrid::nodes() const {
    std::vector<double> out(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) out[static_cast<std::size_t>(i)] = x(i);
    return out;
}

GridFunction::GridFunction(SpatialGrid grid, std::vector<double> values, double slope_bound)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid_.n_nodes)) throw ValidationError("grid function: size mismatch");
    for (double v : values_)
        if (!std::isfinite(v)) throw NumericalError("grid function: non-finite value");
    const double h = grid_.h();
    const std::size_t n = values_.size();
    slope_left_ = std::clamp((values_[1] - values_[0]) / h, -slope_bound, slope_bound);
    slope_right_ = std::clamp((values_[n - 1] - values_[n - 2]) / h, -slope_bound, slope_bound);
}

double GridFunction::operator()(double x) const {
    const int n = grid_.n_nodes;
    if (x <= grid_.x_min) return values_.front() + slope_left_ * (x - grid_.x_min);
    if (x >= grid_.x_max) return values_.back() + slope_right_ * (x - grid_.x_max);
    const double u = (x - grid_.x_min) / grid_.h();
    int i = static_cast<int>(u);
    i = std::clamp(i, 0, n - 2);
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * values_[static_cast<std::size_t>(i)] + w * values_[static_cast<std::size_t>(i + 1)];
}

} // namespace teugels
