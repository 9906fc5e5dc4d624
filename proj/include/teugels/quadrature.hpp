#pragma once

#include <vector>

#include "teugels/levy_model.hpp"

namespace teugels {

/// Discrete stand-in for integrals against nu: int g dnu ~ sum_q w_q g(zeta_q).
///
/// Point masses are reproduced exactly (atoms become nodes). Each exponential
/// tail gets an n-point Gauss-Laguerre rule, exact for polynomials of degree
/// up to 2n - 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    static QuadratureRule for_model(const LevyModel& model, int order = 16);

    std::size_t size() const { return nodes.size(); }
    double mass() const;
    /// sum_q w_q zeta_q^i.
    double moment(int i) const;
};

/// Nodes and weights of the n-point Gauss-Laguerre rule for int_0^inf g(y) e^{-y} dy.
void gauss_laguerre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace teugels
