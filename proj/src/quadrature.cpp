#include "teugels/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "teugels/errors.hpp"

namespace teugels {

void gauss_laguerre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw ValidationError("Gauss-Laguerre order must be >= 1");
    // Golub-Welsch on the Jacobi matrix of the Laguerre recurrence.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = 2.0 * i + 1.0;
        if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = i + 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    if (eig.info() != Eigen::Success) throw NumericalError("Gauss-Laguerre eigen solve failed");
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        weights[static_cast<std::size_t>(i)] = v0 * v0;
    }
}

QuadratureRule QuadratureRule::for_model(const LevyModel& model, int order) {
    QuadratureRule rule;
    const JumpMeasure& nu = model.jumps();
    switch (nu.kind) {
    case JumpKind::none:
        break;
    case JumpKind::point_masses:
        for (const auto& a : nu.atoms) {
            rule.nodes.push_back(a.location);
            rule.weights.push_back(a.intensity);
        }
        break;
    case JumpKind::two_sided_exponential: {
        const auto& e = nu.exponential;
        std::vector<double> y, w;
        gauss_laguerre(order, y, w);
        if (e.p < 1.0) {
            for (std::size_t i = y.size(); i-- > 0;) {
                rule.nodes.push_back(-y[i] / e.beta);
                rule.weights.push_back(e.lambda * (1.0 - e.p) * w[i]);
            }
        }
        if (e.p > 0.0) {
            for (std::size_t i = 0; i < y.size(); ++i) {
                rule.nodes.push_back(y[i] / e.alpha);
                rule.weights.push_back(e.lambda * e.p * w[i]);
            }
        }
        break;
    }
    }
    if (std::abs(rule.mass() - nu.total_mass()) > 1e-10 * std::max(1.0, nu.total_mass()))
        throw NumericalError("quadrature does not reproduce the total jump intensity");
    return rule;
}

double QuadratureRule::mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double QuadratureRule::moment(int i) const {
    double s = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) s += weights[q] * std::pow(nodes[q], i);
    return s;
}

} // namespace teugels
