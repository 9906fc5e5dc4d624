#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "teugels/bsde_solver.hpp"
#include "teugels/control_problem.hpp"
#include "teugels/grid_function.hpp"
#include "teugels/path_sim.hpp"

namespace teugels {

/// Jump-adapted Euler on one path with step-constant controls: the continuous
/// part of the step moves X with the coefficient at X_s, then each jump moves
/// it with the coefficient at the current pre-jump state.
std::vector<double> forward_simulate(const ControlProblem& problem, std::span<const double> controls, double x0,
                                     const LevyPath& path);

/// Same scheme on every path of an increment table.
ForwardEnsemble forward_simulate(const ControlProblem& problem, std::span<const double> controls, double x0,
                                 std::shared_ptr<const IncrementTable> increments, Exec exec = Exec::parallel);

/// Time slices t0 < ... < T (uniform) times the spatial nodes of `x`.
struct ValueLattice {
    double t0 = 0.0;
    double T = 1.0;
    int n_slices = 10;
    SpatialGrid x;

    double time(int l) const {
        return l == n_slices ? T : t0 + (T - t0) * static_cast<double>(l) / static_cast<double>(n_slices);
    }
};

struct McConfig {
    std::size_t paths = 10000;
    std::size_t substeps = 5;
    std::uint64_t seed = 1;
    BsdeConfig bsde;
    double slope_bound = std::numeric_limits<double>::infinity();
};

struct ValueEstimate {
    ValueLattice lattice;
    std::vector<double> W;      // (n_slices + 1) x n_nodes
    std::vector<double> stderr; // same shape
    std::vector<int> policy;    // n_slices x n_nodes, index into U

    double w(int l, int i) const { return W[static_cast<std::size_t>(l * lattice.x.n_nodes + i)]; }
    double se(int l, int i) const { return stderr[static_cast<std::size_t>(l * lattice.x.n_nodes + i)]; }
    GridFunction slice(int l, double slope_bound = std::numeric_limits<double>::infinity()) const;
    GridFunction stderr_slice(int l) const;
};

struct NodeValue {
    double value = 0.0;
    double stderr = 0.0;       // this step's Monte Carlo error, plus propagated next-slice error
    double step_stderr = 0.0;  // this step only
};

/// Backward semigroup G_{t,t+delta}^{x;u}[psi(X_{t+delta})] at each start node,
/// one BSDE solve per node on the shared increment table (common random
/// numbers across nodes). `stderr_next`, when given, is propagated as the
/// ensemble mean of its interpolant at X_{t+delta}.
std::vector<NodeValue> semigroup_step(const ControlProblem& problem, double u, const GridFunction& value_next,
                                      const GridFunction* stderr_next, std::span<const double> start_nodes,
                                      std::shared_ptr<const IncrementTable> increments, const BsdeConfig& bsde,
                                      Exec exec = Exec::parallel);

/// Seed of the ensemble used on slice l of a lattice.
std::uint64_t slice_seed(std::uint64_t seed, int slice);

/// Monte Carlo dynamic programming: slice by slice, one semigroup step per
/// control, pointwise minimum (lowest index wins ties).
ValueEstimate value_dp(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis,
                       const ValueLattice& lattice, const McConfig& config, Exec exec = Exec::parallel);

struct DppResult {
    double lhs = 0.0;
    double lhs_stderr = 0.0;
    double rhs = 0.0;
    double rhs_stderr = 0.0;
    double residual = 0.0;
    double combined_stderr = 0.0;
    int argmin = 0;
};

struct DppConfig {
    SpatialGrid x;
    int slices_per_delta = 2;
    McConfig mc;
};

/// |W(t,x) - min_u G_{t,t+delta}^{x;u}[W(t+delta, .)]|. W comes from value_dp on
/// a lattice starting at t with slices of delta / slices_per_delta; the right
/// side re-uses exactly the same paths over [t, t+delta], concatenated, with a
/// control held fixed over the whole interval.
DppResult dpp_residual(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis, double t,
                       double x, double delta, const DppConfig& config, Exec exec = Exec::parallel);

struct RegularityReport {
    double C_x = 0.0; // max |dW/dx|
    double C_t = 0.0; // max |dW| / ((1 + |x|) |dt|^{1/2})
    std::vector<double> C_x_per_slice;
    bool finite = true;
};

RegularityReport regularity_diagnostics(const ValueEstimate& estimate);
RegularityReport regularity_diagnostics(std::span<const double> surface, std::span<const double> times,
                                        const SpatialGrid& grid);

} // namespace teugels
