#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "teugels/exec.hpp"
#include "teugels/path_sim.hpp"
#include "teugels/regression.hpp"

namespace teugels {

/// f(t, x, y, z) where x is the forward state at the start of the step and z
/// holds the K Teugels components.
using DriverFn = std::function<double(double t, double x, double y, std::span<const double> z)>;

/// f(t, x, y, z) = f1(t, x, y) + sum_k gamma_k z_k with deterministic gamma.
struct LinearZDecomposition {
    std::function<double(double t, double x, double y)> f1;
    std::vector<double> gamma;
};

struct BsdeSpec {
    std::function<double(double x_T)> terminal;
    DriverFn driver;
    double lipschitz_y = 0.0;
    double lipschitz_z = 0.0;
    bool z_free = false;
    std::optional<LinearZDecomposition> linear_z;

    /// Build a spec whose driver is the given linear-in-z decomposition.
    static BsdeSpec linear(std::function<double(double)> terminal, LinearZDecomposition decomposition,
                           double lipschitz_y);
};

/// Forward state sampled on the ensemble's grid, path-major N x (M + 1).
struct ForwardEnsemble {
    std::shared_ptr<const IncrementTable> increments;
    std::vector<double> state;

    std::size_t paths() const { return increments->N; }
    std::size_t steps() const { return increments->M; }
    double x(std::size_t path, std::size_t s) const { return state[path * (increments->M + 1) + s]; }
};

enum class BsdeScheme {
    explicit_euler, // Y_s = E[Y_{s+1} + f(t_s, X_s, Y_{s+1}, Z_s) dt | X_s]
    heun            // explicit trapezoid: Euler predictor, one corrector pass
};

struct BsdeConfig {
    int regression_degree = 3;
    BsdeScheme scheme = BsdeScheme::heun;
    /// Off: Z is taken as zero (only sound for drivers that ignore z).
    bool compute_z = true;
};

struct BsdeSolution {
    std::vector<double> times;
    std::size_t N = 0;
    std::size_t M = 0;
    int K = 0;
    std::vector<double> Y;          // N x (M + 1), pathwise conditional expectations
    std::vector<PolyFit> z_fits;    // M x K: Z_s^(k) as a function of X_s
    std::vector<double> y_mean;     // M + 1
    std::vector<double> y_stderr;   // M + 1, regression standard error of Y_s
    std::vector<double> z_norm_mean; // M
    double y0 = 0.0;
    /// Monte Carlo standard error of y0 from the pathwise sum eta + sum f dt
    /// (at least the step-0 regression error).
    double y0_stderr = 0.0;
    std::size_t reduced_degree_steps = 0;
    /// (sup_s E|Y_s|^2 + E int |Z|^2) / (E|eta|^2 + E int |f(s,0,0)|^2), fitted not asserted.
    double a_priori_ratio = 0.0;

    double y(std::size_t path, std::size_t s) const { return Y[path * (M + 1) + s]; }
    double z(const ForwardEnsemble& fe, std::size_t path, std::size_t s, int k) const {
        return z_fits[s * static_cast<std::size_t>(K) + static_cast<std::size_t>(k - 1)](fe.x(path, s));
    }
    /// Mean of Z_s^(k) over the paths.
    double z_mean(const ForwardEnsemble& fe, std::size_t s, int k) const;
};

/// Backward induction with regression-estimated conditional expectations.
/// Z_s^(k) = E[(Y_{s+1} - E[Y_{s+1}|X_s]) dH_s^(k) | X_s] / dt, then Y_s by
/// the chosen scheme.
BsdeSolution solve_backward(const BsdeSpec& spec, const ForwardEnsemble& ensemble, const BsdeConfig& config = {},
                            Exec exec = Exec::parallel);

/// Deterministic scalar linear BSDE: Y' = -(a(s) + b(s) Y), Y_T = eta.
struct LinearBsdeOracle {
    std::function<double(double)> a;
    std::function<double(double)> b;
    double eta = 0.0;
    double T = 1.0;
};

/// Y at each query time (all <= T), integrated backward with an adaptive
/// Dormand-Prince method at 1e-13 tolerance.
std::vector<double> solve_linear_closed_form(const LinearBsdeOracle& oracle, std::span<const double> query_times);

struct ComparisonReport {
    std::size_t points = 0;
    std::size_t violations = 0;
    double violation_fraction = 0.0;
    double max_excess = 0.0; // max over points of Y_low - Y_high
    double min_jump_functional_low = 0.0;
    double min_jump_functional_high = 0.0;
    double y0_low = 0.0;
    double y0_high = 0.0;
};

/// Checks Y_low <= Y_high up to 3 * combined regression stderr on every
/// (path, time). Throws AdmissibilityError when sum_k gamma_k dH^(k) <= -1 on
/// some sampled jump and ValidationError when eta_low > eta_high on a path.
ComparisonReport check_comparison(const BsdeSpec& low, const BsdeSpec& high, const ForwardEnsemble& ensemble,
                                  const BsdeConfig& config = {}, Exec exec = Exec::parallel);

/// min over sampled jumps of sum_k gamma_k p_k(jump size); +inf without jumps.
double min_jump_functional(std::span<const double> gamma, const IncrementTable& increments);

/// Forward state X = x0 + L on the ensemble (F = 1), the default BSDE state.
ForwardEnsemble levy_state(std::shared_ptr<const IncrementTable> increments, double x0 = 0.0);

} // namespace teugels
