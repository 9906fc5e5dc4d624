#include "teugels/control_problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "teugels/errors.hpp"

namespace teugels {

ControlProblem ControlProblem::from_registry(const ForwardSpec& F, const DriverSpec& f, const TerminalSpec& phi,
                                             std::vector<double> U, double T, double x_bound) {
    if (U.empty()) throw ValidationError("control set U is empty");
    if (!(T > 0.0)) throw ValidationError("horizon T must be positive");
    ControlProblem p;
    p.U = std::move(U);
    p.T = T;

    double lip_F = 0.0;
    if (F.kind == "constant") {
        const double a = F.a;
        p.F = [a](double, double, double) { return a; };
    } else if (F.kind == "linear") {
        const double a = F.a, b = F.b;
        p.F = [a, b](double, double x, double) { return a + b * x; };
        lip_F = std::abs(b);
    } else if (F.kind == "affine_u") {
        const double a = F.a, b = F.b, c = F.c;
        p.F = [a, b, c](double, double x, double u) { return a + b * x + c * u; };
        lip_F = std::abs(b);
    } else {
        throw ValidationError("unknown forward coefficient kind '" + F.kind + "'");
    }

    DriverSpec d = f;
    if (d.kind == "zero") {
        d = DriverSpec{};
    } else if (d.kind == "constant") {
        d = DriverSpec{};
        d.kind = "constant";
        d.c0 = f.c0;
    } else if (d.kind != "linear") {
        throw ValidationError("unknown driver kind '" + f.kind + "'");
    }
    p.f1 = [d](double t, double x, double y, double u) {
        return d.c0 + d.ct * t + d.cx * x + d.cu * u + d.cuu * u * u + d.r * y;
    };
    const auto f1 = p.f1;
    const auto gamma = d.gamma;
    p.f = [f1, gamma](double t, double x, double y, std::span<const double> z, double u) {
        double v = f1(t, x, y, u);
        const std::size_t n = std::min(gamma.size(), z.size());
        for (std::size_t k = 0; k < n; ++k) v += gamma[k] * z[k];
        return v;
    };
    p.gamma = [gamma](double, double) { return gamma; };
    double gnorm = 0.0;
    for (double g : gamma) gnorm += g * g;
    p.z_free = gnorm == 0.0;

    double lip_phi = 0.0;
    if (phi.kind == "constant") {
        const double c0 = phi.c0;
        p.phi = [c0](double) { return c0; };
    } else if (phi.kind == "linear") {
        const double c0 = phi.c0, c1 = phi.c1;
        p.phi = [c0, c1](double x) { return c0 + c1 * x; };
        lip_phi = std::abs(c1);
    } else if (phi.kind == "quadratic") {
        const double c0 = phi.c0, c1 = phi.c1, c2 = phi.c2;
        p.phi = [c0, c1, c2](double x) { return c0 + c1 * x + c2 * x * x; };
        lip_phi = 2.0 * std::abs(c2) * x_bound + std::abs(c1);
    } else {
        throw ValidationError("unknown terminal kind '" + phi.kind + "'");
    }

    p.lipschitz.L1 = std::max({lip_F, std::abs(d.cx), lip_phi});
    p.lipschitz.L2 = std::abs(d.r);
    p.lipschitz.L3 = std::sqrt(gnorm);
    return p;
}

std::vector<Diagnostic> verify_assumptions(const ControlProblem& problem, std::span<const double> x_lattice,
                                           int K, double growth_constant) {
    std::vector<Diagnostic> out;
    const auto& L = problem.lipschitz;
    const double slack = 1e-9;
    const std::vector<double> ys = {-2.0, -0.5, 0.0, 0.5, 2.0};
    std::vector<double> z0(static_cast<std::size_t>(K), 0.0), z1(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) z1[static_cast<std::size_t>(k)] = 0.5 / (1.0 + k);
    double znorm = 0.0;
    for (double v : z1) znorm += v * v;
    znorm = std::sqrt(znorm);

    auto flag = [&](const std::string& code, const std::string& what, double x) {
        std::ostringstream msg;
        msg << what << " at x = " << x;
        out.push_back({code, msg.str()});
    };

    const double t = 0.5 * problem.T;
    for (double u : problem.U) {
        for (std::size_t i = 0; i + 1 < x_lattice.size(); ++i) {
            const double x1 = x_lattice[i], x2 = x_lattice[i + 1], dx = std::abs(x2 - x1);
            if (std::abs(problem.F(t, x1, u) - problem.F(t, x2, u)) > L.L1 * dx * (1 + slack) + slack)
                flag("lipschitz-F", "F exceeds declared L1", x1);
            if (std::abs(problem.phi(x1) - problem.phi(x2)) > L.L1 * dx * (1 + slack) + slack)
                flag("lipschitz-phi", "phi exceeds declared L1", x1);
            for (double y : ys) {
                const double dfx = std::abs(problem.f(t, x1, y, z0, u) - problem.f(t, x2, y, z0, u));
                if (dfx > L.L1 * dx * (1 + slack) + slack) flag("lipschitz-f-x", "f exceeds declared L1 in x", x1);
                const double dfy = std::abs(problem.f(t, x1, y, z0, u) - problem.f(t, x1, y + 0.25, z0, u));
                if (dfy > L.L2 * 0.25 * (1 + slack) + slack) flag("lipschitz-f-y", "f exceeds declared L2 in y", x1);
                const double dfz = std::abs(problem.f(t, x1, y, z0, u) - problem.f(t, x1, y, z1, u));
                if (dfz > L.L3 * znorm * (1 + slack) + slack) flag("lipschitz-f-z", "f exceeds declared L3 in z", x1);
            }
        }
        for (double x : x_lattice) {
            for (double y : ys) {
                const double lhs = std::abs(problem.F(t, x, u)) + std::abs(problem.f(t, x, y, z1, u)) + std::abs(problem.phi(x));
                const double rhs = growth_constant * (1.0 + std::abs(x) + std::abs(y) + znorm);
                if (lhs > rhs) flag("linear-growth", "|F| + |f| + |phi| exceeds L (1 + |x| + |y| + |z|)", x);
            }
        }
    }
    return out;
}

} // namespace teugels
