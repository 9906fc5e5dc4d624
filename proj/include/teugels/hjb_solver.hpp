#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "teugels/control_problem.hpp"
#include "teugels/exec.hpp"
#include "teugels/grid_function.hpp"
#include "teugels/levy_model.hpp"
#include "teugels/quadrature.hpp"
#include "teugels/teugels_basis.hpp"

namespace teugels {

struct HjbConfig {
    /// 0 picks the smallest count that meets the CFL bound.
    std::size_t time_steps = 0;
    double cfl_safety = 0.9;
    int quad_order = 16;
    int K = 1;
    double slope_bound = std::numeric_limits<double>::infinity();
};

/// How D_x is taken. `central` everywhere, or `monotone`: central where the
/// diffusion dominates the effective drift on the cell, one-sided upwind
/// otherwise.
enum class Differencing { central, monotone };

/// Nonlocal operators of one problem on one model, with the quadrature and
/// the p_k(zeta_q) table precomputed.
class HjbOperators {
public:
    HjbOperators(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis,
                 QuadratureRule quad, int K);

    const ControlProblem& problem() const { return *problem_; }
    const QuadratureRule& quadrature() const { return quad_; }
    int K() const { return K_; }

    /// m_1 F D v + 1/2 sigma^2 F^2 D^2 v + int [v(x + F z) - v(x) - D v F z] nu(dz).
    double generator(const GridFunction& v, double t, double x, double u,
                     Differencing diff = Differencing::central) const;

    /// delta_{k1} F D v / a_11 + int [v(x + F z) - v(x) - D v F z] p_k(z) nu(dz).
    double coefficient(const GridFunction& v, double t, double x, double u, int k,
                       Differencing diff = Differencing::central) const;

    /// generator + f(t, x, v(x), (coefficient_k)_{k <= K}, u).
    double hamiltonian(const GridFunction& v, double t, double x, double u,
                       Differencing diff = Differencing::central) const;

    /// Sum over the v-coefficients of the explicit update, per unit time, at
    /// (t, x, u): the step is monotone when dt times this is at most 1.
    double cfl_rate(const GridFunction& v, double t, double x, double u) const;

private:
    struct Derivatives {
        double d1 = 0.0;
        double d2 = 0.0;
    };
    Derivatives derivatives(const GridFunction& v, double x, double F, double drift, Differencing diff) const;
    double effective_drift(double t, double u) const;
    double jump_sum(const GridFunction& v, double x, double F, double vx, double d1, int k) const;

    const ControlProblem* problem_;
    QuadratureRule quad_;
    int K_;
    double m1_;
    double sigma2_;
    double a11_;
    std::vector<double> p_table_;     // q x K: p_k(zeta_q)
    std::vector<double> p_zeta_mean_; // K: sum_q w_q p_k(zeta_q) zeta_q
    double zeta_mean_ = 0.0;          // sum_q w_q zeta_q
};

double generator_Lu(const GridFunction& v, double x, double u, double t, const HjbOperators& ops);
double operator_Luk(const GridFunction& v, double x, double u, int k, double t, const HjbOperators& ops);
double hamiltonian(const GridFunction& v, double x, double u, double t, const HjbOperators& ops);

struct HjbStep {
    GridFunction values;
    std::vector<int> argmin;
};

/// One explicit step v(t) = v(t + dt) + dt min_u H(t, x, v(t + dt), u) at
/// every node, monotone differencing, lowest control index on ties. Throws
/// NumericalError when dt breaks the CFL bound or a value is non-finite.
HjbStep step_backward(const GridFunction& v_next, double t, double dt, const HjbOperators& ops, double cfl_safety,
                      double slope_bound = std::numeric_limits<double>::infinity(), Exec exec = Exec::parallel);

/// Largest CFL rate over nodes and controls at time t.
double cfl_rate(const GridFunction& v, double t, const HjbOperators& ops);

struct HjbSolution {
    SpatialGrid grid;
    std::vector<double> times; // time_steps + 1, times[0] = t0
    std::vector<double> W;     // (time_steps + 1) x n_nodes
    std::vector<int> policy;   // time_steps x n_nodes
    std::size_t time_steps = 0;

    double w(std::size_t n, int i) const { return W[n * static_cast<std::size_t>(grid.n_nodes) + static_cast<std::size_t>(i)]; }
    GridFunction slice(std::size_t n) const;
};

/// March from W(T) = phi back to t0.
HjbSolution solve(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis,
                  const SpatialGrid& grid, const HjbConfig& config, double t0 = 0.0, Exec exec = Exec::parallel);

struct ConvergenceRow {
    double h = 0.0;
    double dt = 0.0;
    std::size_t time_steps = 0;
    double max_rel_error = 0.0;
};

/// Solves on each grid and reports max |W(t0,x) / oracle(x) - 1| over nodes
/// in [x_lo, x_hi].
std::vector<ConvergenceRow> convergence_study(const ControlProblem& problem, const LevyModel& model,
                                              const OrthoBasis& basis, const std::vector<SpatialGrid>& grids,
                                              const HjbConfig& config, const std::function<double(double)>& oracle,
                                              double x_lo, double x_hi, Exec exec = Exec::parallel);

} // namespace teugels
