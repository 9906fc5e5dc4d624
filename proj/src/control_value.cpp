#include "teugels/control_value.hpp"

#include <cmath>
#include <sstream>

#include "teugels/errors.hpp"
#include "teugels/rng.hpp"

namespace teugels {

namespace {

void check_finite_state(double x, std::size_t step) {
    if (!std::isfinite(x)) {
        std::ostringstream msg;
        msg << "forward state blew up at step " << step;
        throw NumericalError(msg.str());
    }
}

BsdeSpec control_spec(const ControlProblem& problem, double u, std::function<double(double)> terminal) {
    BsdeSpec spec;
    spec.terminal = std::move(terminal);
    auto f = problem.f;
    spec.driver = [f, u](double t, double x, double y, std::span<const double> z) { return f(t, x, y, z, u); };
    spec.lipschitz_y = problem.lipschitz.L2;
    spec.lipschitz_z = problem.lipschitz.L3;
    spec.z_free = problem.z_free;
    return spec;
}

} // namespace

std::vector<double> forward_simulate(const ControlProblem& problem, std::span<const double> controls, double x0,
                                     const LevyPath& path) {
    const std::size_t M = path.steps();
    if (controls.size() != M) throw ValidationError("forward_simulate: need one control per step");
    std::vector<double> x(M + 1);
    x[0] = x0;
    double state = x0;
    for (std::size_t s = 0; s < M; ++s) {
        const double t = path.times[s];
        const double u = controls[s];
        const double cont = path.drift_rate * (path.times[s + 1] - t) + path.diffusion_increments[s];
        state += problem.F(t, state, u) * cont;
        for (const auto& j : path.step_jumps(s)) state += problem.F(t, state, u) * j.size;
        check_finite_state(state, s);
        x[s + 1] = state;
    }
    return x;
}

ForwardEnsemble forward_simulate(const ControlProblem& problem, std::span<const double> controls, double x0,
                                 std::shared_ptr<const IncrementTable> increments, Exec exec) {
    const IncrementTable& inc = *increments;
    const std::size_t N = inc.N, M = inc.M;
    if (controls.size() != M) throw ValidationError("forward_simulate: need one control per step");
    ForwardEnsemble fe;
    fe.state.resize(N * (M + 1));
    const auto n = static_cast<std::ptrdiff_t>(N);
    bool blew_up = false;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel) reduction(|| : blew_up)
    for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
        const auto p = static_cast<std::size_t>(pi);
        double* row = fe.state.data() + p * (M + 1);
        double state = x0;
        row[0] = state;
        for (std::size_t s = 0; s < M; ++s) {
            const double t = inc.times[s];
            const double u = controls[s];
            state += problem.F(t, state, u) * inc.continuous[p * M + s];
            for (double jump : inc.step_jumps(p, s)) state += problem.F(t, state, u) * jump;
            row[s + 1] = state;
        }
        if (!std::isfinite(state)) blew_up = true;
    }
    if (blew_up) throw NumericalError("forward state blew up on the ensemble");
    fe.increments = std::move(increments);
    return fe;
}

GridFunction ValueEstimate::slice(int l, double slope_bound) const {
    const auto n = static_cast<std::size_t>(lattice.x.n_nodes);
    std::vector<double> v(W.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(l) * n),
                          W.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(l + 1) * n));
    return GridFunction(lattice.x, std::move(v), slope_bound);
}

GridFunction ValueEstimate::stderr_slice(int l) const {
    const auto n = static_cast<std::size_t>(lattice.x.n_nodes);
    std::vector<double> v(stderr.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(l) * n),
                          stderr.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(l + 1) * n));
    // Error bars are extended flat.
    return GridFunction(lattice.x, std::move(v), 0.0);
}

std::vector<NodeValue> semigroup_step(const ControlProblem& problem, double u, const GridFunction& value_next,
                                      const GridFunction* stderr_next, std::span<const double> start_nodes,
                                      std::shared_ptr<const IncrementTable> increments, const BsdeConfig& bsde,
                                      Exec exec) {
    const std::vector<double> controls(increments->M, u);
    const BsdeSpec spec = control_spec(problem, u, [&value_next](double x) { return value_next(x); });
    std::vector<NodeValue> out(start_nodes.size());
    for (std::size_t i = 0; i < start_nodes.size(); ++i) {
        const ForwardEnsemble fe = forward_simulate(problem, controls, start_nodes[i], increments, exec);
        const BsdeSolution sol = solve_backward(spec, fe, bsde, exec);
        double carried = 0.0;
        if (stderr_next) {
            const std::size_t M = fe.steps();
            for (std::size_t p = 0; p < fe.paths(); ++p) carried += (*stderr_next)(fe.x(p, M));
            carried /= static_cast<double>(fe.paths());
        }
        out[i] = {sol.y0, std::hypot(sol.y0_stderr, carried), sol.y0_stderr};
    }
    return out;
}

std::uint64_t slice_seed(std::uint64_t seed, int slice) { return derive_seed(seed, static_cast<std::uint64_t>(slice)); }

ValueEstimate value_dp(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis,
                       const ValueLattice& lattice, const McConfig& config, Exec exec) {
    if (problem.U.empty()) throw ValidationError("value_dp: empty control set");
    if (lattice.n_slices < 1) throw ValidationError("value_dp: need at least one time slice");
    if (!(lattice.T > lattice.t0)) throw ValidationError("value_dp: need T > t0");
    if (config.paths < 2) throw ValidationError("value_dp: need at least 2 paths");

    ValueEstimate est;
    est.lattice = lattice;
    const int nx = lattice.x.n_nodes;
    const auto nxs = static_cast<std::size_t>(nx);
    const auto L = static_cast<std::size_t>(lattice.n_slices);
    est.W.assign((L + 1) * nxs, 0.0);
    est.stderr.assign((L + 1) * nxs, 0.0);
    est.policy.assign(L * nxs, 0);

    const auto nodes = lattice.x.nodes();
    for (std::size_t i = 0; i < nxs; ++i) est.W[L * nxs + i] = problem.phi(nodes[i]);

    BsdeConfig bsde = config.bsde;
    if (problem.z_free) bsde.compute_z = false;
    for (int l = lattice.n_slices - 1; l >= 0; --l) {
        const auto table = simulate_increment_table(model, basis, lattice.time(l), lattice.time(l + 1),
                                                    config.substeps, config.paths, slice_seed(config.seed, l), exec);
        const GridFunction next = est.slice(l + 1, config.slope_bound);
        const GridFunction next_se = est.stderr_slice(l + 1);
        const auto row = static_cast<std::size_t>(l) * nxs;
        for (std::size_t c = 0; c < problem.U.size(); ++c) {
            const auto values = semigroup_step(problem, problem.U[c], next, &next_se, nodes, table, bsde, exec);
            for (std::size_t i = 0; i < nxs; ++i) {
                if (c == 0 || values[i].value < est.W[row + i]) {
                    est.W[row + i] = values[i].value;
                    est.stderr[row + i] = values[i].stderr;
                    est.policy[row + i] = static_cast<int>(c);
                }
            }
        }
    }
    return est;
}

DppResult dpp_residual(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis, double t,
                       double x, double delta, const DppConfig& config, Exec exec) {
    if (!(delta > 0.0) || t + delta > problem.T + 1e-12) throw ValidationError("dpp_residual: need 0 < delta <= T - t");
    if (config.slices_per_delta < 1) throw ValidationError("dpp_residual: slices_per_delta must be >= 1");
    const double slice_len = delta / config.slices_per_delta;
    const double ratio = (problem.T - t) / slice_len;
    const int n_slices = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - n_slices) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError("dpp_residual: (T - t) must be a multiple of delta / slices_per_delta");

    ValueLattice lattice{t, problem.T, n_slices, config.x};
    const ValueEstimate est = value_dp(problem, model, basis, lattice, config.mc, exec);

    DppResult r;
    const GridFunction w0 = est.slice(0);
    const GridFunction se0 = est.stderr_slice(0);
    r.lhs = w0(x);
    r.lhs_stderr = se0(x);

    // Same paths as the first slices_per_delta lattice slices, glued together.
    std::vector<LevyPath> glued;
    for (int l = 0; l < config.slices_per_delta; ++l) {
        auto part = simulate_ensemble(model, lattice.time(l), lattice.time(l + 1), config.mc.substeps, config.mc.paths,
                                      slice_seed(config.mc.seed, l), exec);
        if (l == 0) {
            glued = std::move(part);
        } else {
            for (std::size_t p = 0; p < glued.size(); ++p) glued[p] = concatenate(glued[p], part[p]);
        }
    }
    const auto table = std::make_shared<const IncrementTable>(build_increment_table(glued, basis, model, exec));
    glued.clear();

    const GridFunction next = est.slice(config.slices_per_delta, config.mc.slope_bound);
    const GridFunction next_se = est.stderr_slice(config.slices_per_delta);
    const std::vector<double> start{x};
    for (std::size_t c = 0; c < problem.U.size(); ++c) {
        const auto v = semigroup_step(problem, problem.U[c], next, &next_se, start, table, config.mc.bsde, exec);
        if (c == 0 || v[0].value < r.rhs) {
            r.rhs = v[0].value;
            r.rhs_stderr = v[0].stderr;
            r.argmin = static_cast<int>(c);
        }
    }
    r.residual = std::abs(r.lhs - r.rhs);
    r.combined_stderr = std::hypot(r.lhs_stderr, r.rhs_stderr);
    return r;
}

RegularityReport regularity_diagnostics(std::span<const double> surface, std::span<const double> times,
                                        const SpatialGrid& grid) {
    RegularityReport rep;
    const int nx = grid.n_nodes;
    const std::size_t nt = times.size();
    const double h = grid.h();
    rep.C_x_per_slice.assign(nt, 0.0);
    auto w = [&](std::size_t l, int i) { return surface[l * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)]; };
    for (std::size_t l = 0; l < nt; ++l) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double cx = std::abs(w(l, i + 1) - w(l, i)) / h;
            rep.C_x_per_slice[l] = std::max(rep.C_x_per_slice[l], cx);
        }
        rep.C_x = std::max(rep.C_x, rep.C_x_per_slice[l]);
    }
    for (std::size_t l = 0; l + 1 < nt; ++l) {
        const double dt = std::abs(times[l + 1] - times[l]);
        for (int i = 0; i < nx; ++i) {
            const double ct = std::abs(w(l + 1, i) - w(l, i)) / ((1.0 + std::abs(grid.x(i))) * std::sqrt(dt));
            rep.C_t = std::max(rep.C_t, ct);
        }
    }
    rep.finite = std::isfinite(rep.C_x) && std::isfinite(rep.C_t);
    return rep;
}

RegularityReport regularity_diagnostics(const ValueEstimate& estimate) {
    std::vector<double> times(static_cast<std::size_t>(estimate.lattice.n_slices) + 1);
    for (int l = 0; l <= estimate.lattice.n_slices; ++l) times[static_cast<std::size_t>(l)] = estimate.lattice.time(l);
    return regularity_diagnostics(estimate.W, times, estimate.lattice.x);
}

} // namespace teugels
