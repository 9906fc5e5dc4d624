#pragma once

#include <array>
#include <span>

#include "teugels/exec.hpp"

namespace teugels {

inline constexpr int kMaxRegressionDegree = 6;

/// Least-squares polynomial in a standardized scalar state.
struct PolyFit {
    double center = 0.0;
    double scale = 1.0;
    int degree = 0;
    std::array<double, kMaxRegressionDegree + 1> coef{};
    double residual_variance = 0.0;
    std::size_t samples = 0;

    double operator()(double x) const {
        const double u = (x - center) / scale;
        double acc = 0.0;
        for (int d = degree; d >= 0; --d) acc = acc * u + coef[static_cast<std::size_t>(d)];
        return acc;
    }
    int basis_size() const { return degree + 1; }
    /// Standard error of a fitted value, averaged over the design.
    double stderr() const;
};

/// Design built once per state sample, reused for several targets.
///
/// The effective degree drops below the requested one when the state takes
/// too few distinct values for the cubic (or higher) design to be well posed;
/// `reduced()` reports it. A deterministic state gives degree 0 (sample mean).
class PolyRegression {
public:
    PolyRegression(std::span<const double> state, int degree, Exec exec = Exec::parallel);

    PolyFit fit(std::span<const double> target) const;

    int degree() const { return degree_; }
    bool reduced() const { return reduced_; }

private:
    std::span<const double> state_;
    Exec exec_;
    int degree_ = 0;
    bool reduced_ = false;
    double center_ = 0.0;
    double scale_ = 1.0;
    std::array<double, (kMaxRegressionDegree + 1) * (kMaxRegressionDegree + 1)> normal_{};
};

} // namespace teugels
