#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teugels/levy_model.hpp"

namespace teugels {

using ForwardFn = std::function<double(double t, double x, double u)>;
using ControlDriverFn = std::function<double(double t, double x, double y, std::span<const double> z, double u)>;
using TerminalFn = std::function<double(double x)>;

struct LipschitzConstants {
    double L1 = 0.0; // x in F, f and phi
    double L2 = 0.0; // y in f
    double L3 = 0.0; // z in f (l2 norm)
};

/// Coefficient registry. Each kind carries the parameters it reads; the rest
/// stay zero.
///
///   forward  : constant  F = a
///              linear    F = a + b x
///              affine_u  F = a + b x + c u
///   driver   : zero      f = 0
///              constant  f = c0
///              linear    f = c0 + ct t + cx x + cu u + cuu u^2 + r y + sum_k gamma_k z_k
///   terminal : constant  phi = c0
///              linear    phi = c0 + c1 x
///              quadratic phi = c0 + c1 x + c2 x^2
struct ForwardSpec {
    std::string kind = "constant";
    double a = 0.0, b = 0.0, c = 0.0;
};

struct DriverSpec {
    std::string kind = "zero";
    double c0 = 0.0, ct = 0.0, cx = 0.0, cu = 0.0, cuu = 0.0, r = 0.0;
    std::vector<double> gamma;
};

struct TerminalSpec {
    std::string kind = "constant";
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

/// Controlled decoupled FBSDE dX = F(s, X_-, u) dL, dY = -f ds + sum Z dH,
/// Y_T = phi(X_T), with a finite control set U.
struct ControlProblem {
    ForwardFn F;
    ControlDriverFn f;
    TerminalFn phi;
    std::vector<double> U;
    double T = 1.0;
    LipschitzConstants lipschitz;
    /// gamma_k(t, u) of the linear-in-z decomposition, when the driver has one.
    std::function<std::vector<double>(double t, double u)> gamma;
    /// f(t, x, y, 0, u); present for registry drivers.
    std::function<double(double t, double x, double y, double u)> f1;
    bool z_free = false;

    /// Build from registry entries; declared Lipschitz constants follow from the
    /// parameters (quadratic terminals use the bound 2|c2| x_bound + |c1|).
    static ControlProblem from_registry(const ForwardSpec& F, const DriverSpec& f, const TerminalSpec& phi,
                                        std::vector<double> U, double T, double x_bound);
};

/// Sampled check of the declared Lipschitz constants and the linear-growth
/// bound |F| + |f| + |phi| <= L (1 + |x| + |y| + |z|) on a test lattice.
/// Returns diagnostics; empty means both held on every sample.
std::vector<Diagnostic> verify_assumptions(const ControlProblem& problem, std::span<const double> x_lattice,
                                           int K, double growth_constant);

} // namespace teugels
