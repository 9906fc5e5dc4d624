#pragma once

#include <vector>

#include "teugels/levy_model.hpp"

namespace teugels::test {

inline LevyModel brownian(double b = 0.0, double sigma2 = 1.0, int i_max = 8) {
    return LevyModel(b, sigma2, JumpMeasure::none(), i_max);
}

inline LevyModel atoms(std::vector<PointMass> a, double sigma2 = 0.0, double b = 0.0, int i_max = 8) {
    return LevyModel(b, sigma2, JumpMeasure::point_masses(std::move(a)), i_max);
}

inline LevyModel two_sided(double lambda, double p, double alpha, double beta, double b = 0.0, double sigma2 = 0.0,
                           int i_max = 8) {
    return LevyModel(b, sigma2, JumpMeasure::two_sided_exponential(lambda, p, alpha, beta), i_max);
}

/// m1 = 0.2 with small symmetric-ish atoms that sit on a 0.1-spaced grid.
inline LevyModel benchmark(int i_max = 8) { return atoms({{0.1, 1.0}, {-0.1, 0.5}}, 0.04, 0.2, i_max); }

} // namespace teugels::test
