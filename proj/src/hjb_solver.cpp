#include "teugels/hjb_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "teugels/errors.hpp"

namespace teugels {

HjbOperators::HjbOperators(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis,
                           QuadratureRule quad, int K)
    : problem_(&problem), quad_(std::move(quad)), K_(K), m1_(model.moment(1)), sigma2_(model.sigma2()),
      a11_(basis.a(1, 1)) {
    if (K < 1) throw ValidationError("HJB: K must be >= 1");
    if (K > basis.rank()) {
        std::ostringstream msg;
        msg << "HJB: K = " << K << " exceeds basis rank " << basis.rank();
        throw ValidationError(msg.str());
    }
    if (basis.model_fingerprint() != model.fingerprint()) throw ValidationError("HJB: basis built for another model");
    if (!problem.F || !problem.f || !problem.phi || problem.U.empty())
        throw ValidationError("HJB: problem needs F, f, phi and a non-empty control set");

    const std::size_t Q = quad_.size();
    const auto Ku = static_cast<std::size_t>(K);
    p_table_.assign(Q * Ku, 0.0);
    p_zeta_mean_.assign(Ku, 0.0);
    std::vector<double> all(static_cast<std::size_t>(basis.rank()));
    for (std::size_t q = 0; q < Q; ++q) {
        const double z = quad_.nodes[q], w = quad_.weights[q];
        basis.eval_p_all(z, all.data());
        zeta_mean_ += w * z;
        for (std::size_t k = 0; k < Ku; ++k) {
            p_table_[q * Ku + k] = all[k];
            p_zeta_mean_[k] += w * all[k] * z;
        }
    }
}

double HjbOperators::effective_drift(double t, double u) const {
    double d = m1_ - zeta_mean_;
    if (problem_->gamma) {
        const std::vector<double> g = problem_->gamma(t, u);
        const std::size_t n = std::min(g.size(), static_cast<std::size_t>(K_));
        for (std::size_t k = 0; k < n; ++k) d += g[k] * ((k == 0 ? 1.0 / a11_ : 0.0) - p_zeta_mean_[k]);
    }
    return d;
}

HjbOperators::Derivatives HjbOperators::derivatives(const GridFunction& v, double x, double F, double drift,
                                                    Differencing diff) const {
    const double h = v.grid().h();
    const double vp = v(x + h), v0 = v(x), vm = v(x - h);
    Derivatives d;
    d.d2 = (vp - 2.0 * v0 + vm) / (h * h);
    const double a = sigma2_ * F * F, b = drift * F;
    if (diff == Differencing::central || a >= std::abs(b) * h) {
        d.d1 = (vp - vm) / (2.0 * h);
    } else if (b > 0.0) {
        d.d1 = (vp - v0) / h;
    } else {
        d.d1 = (v0 - vm) / h;
    }
    return d;
}

double HjbOperators::jump_sum(const GridFunction& v, double x, double F, double vx, double d1, int k) const {
    const auto Ku = static_cast<std::size_t>(K_);
    double s = 0.0;
    for (std::size_t q = 0; q < quad_.size(); ++q) {
        const double jump = F * quad_.nodes[q];
        const double bracket = v(x + jump) - vx - d1 * jump;
        const double weight = k == 0 ? 1.0 : p_table_[q * Ku + static_cast<std::size_t>(k - 1)];
        s += quad_.weights[q] * bracket * weight;
    }
    return s;
}

double HjbOperators::generator(const GridFunction& v, double t, double x, double u, Differencing diff) const {
    const double F = problem_->F(t, x, u);
    const Derivatives d = derivatives(v, x, F, effective_drift(t, u), diff);
    return m1_ * F * d.d1 + 0.5 * sigma2_ * F * F * d.d2 + jump_sum(v, x, F, v(x), d.d1, 0);
}

double HjbOperators::coefficient(const GridFunction& v, double t, double x, double u, int k, Differencing diff) const {
    if (k < 1 || k > K_) {
        std::ostringstream msg;
        msg << "operator_Luk: k = " << k << " outside 1.." << K_;
        throw ValidationError(msg.str());
    }
    const double F = problem_->F(t, x, u);
    const Derivatives d = derivatives(v, x, F, effective_drift(t, u), diff);
    return (k == 1 ? F * d.d1 / a11_ : 0.0) + jump_sum(v, x, F, v(x), d.d1, k);
}

double HjbOperators::hamiltonian(const GridFunction& v, double t, double x, double u, Differencing diff) const {
    const double F = problem_->F(t, x, u);
    const Derivatives d = derivatives(v, x, F, effective_drift(t, u), diff);
    const double vx = v(x);
    const auto Ku = static_cast<std::size_t>(K_);
    double gen = m1_ * F * d.d1 + 0.5 * sigma2_ * F * F * d.d2;
    std::vector<double> z(Ku, 0.0);
    z[0] = F * d.d1 / a11_;
    for (std::size_t q = 0; q < quad_.size(); ++q) {
        const double jump = F * quad_.nodes[q];
        const double wb = quad_.weights[q] * (v(x + jump) - vx - d.d1 * jump);
        gen += wb;
        for (std::size_t k = 0; k < Ku; ++k) z[k] += wb * p_table_[q * Ku + k];
    }
    return gen + problem_->f(t, x, vx, z, u);
}

double HjbOperators::cfl_rate(const GridFunction& v, double t, double x, double u) const {
    const double h = v.grid().h();
    const double F = problem_->F(t, x, u);
    const double a = sigma2_ * F * F, b = std::abs(effective_drift(t, u) * F);
    double rate = a / (h * h);
    if (a < b * h) rate += b / h;
    std::vector<double> g;
    if (problem_->gamma) g = problem_->gamma(t, u);
    const std::size_t n = std::min(g.size(), static_cast<std::size_t>(K_));
    const auto Ku = static_cast<std::size_t>(K_);
    for (std::size_t q = 0; q < quad_.size(); ++q) {
        double tilt = 1.0;
        for (std::size_t k = 0; k < n; ++k) tilt += g[k] * p_table_[q * Ku + k];
        rate += quad_.weights[q] * std::abs(tilt);
    }
    return rate + problem_->lipschitz.L2;
}

double generator_Lu(const GridFunction& v, double x, double u, double t, const HjbOperators& ops) {
    return ops.generator(v, t, x, u);
}

double operator_Luk(const GridFunction& v, double x, double u, int k, double t, const HjbOperators& ops) {
    return ops.coefficient(v, t, x, u, k);
}

double hamiltonian(const GridFunction& v, double x, double u, double t, const HjbOperators& ops) {
    return ops.hamiltonian(v, t, x, u);
}

double cfl_rate(const GridFunction& v, double t, const HjbOperators& ops) {
    double rate = 0.0;
    const SpatialGrid& g = v.grid();
    for (int i = 0; i < g.n_nodes; ++i)
        for (double u : ops.problem().U) rate = std::max(rate, ops.cfl_rate(v, t, g.x(i), u));
    return rate;
}

HjbStep step_backward(const GridFunction& v_next, double t, double dt, const HjbOperators& ops, double cfl_safety,
                      double slope_bound, Exec exec) {
    if (!(dt > 0.0)) throw ValidationError("step_backward: dt must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety < 1.0)) throw ValidationError("step_backward: CFL safety must lie in (0, 1)");
    const double rate = cfl_rate(v_next, t, ops);
    if (dt * rate > cfl_safety) {
        std::ostringstream msg;
        msg << "step_backward: dt = " << dt << " breaks the CFL bound " << cfl_safety / rate;
        throw NumericalError(msg.str());
    }

    const SpatialGrid& grid = v_next.grid();
    const auto& U = ops.problem().U;
    const int n = grid.n_nodes;
    std::vector<double> out(static_cast<std::size_t>(n));
    std::vector<int> arg(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        double best = 0.0;
        int best_c = 0;
        for (std::size_t c = 0; c < U.size(); ++c) {
            const double H = ops.hamiltonian(v_next, t, x, U[c], Differencing::monotone);
            if (c == 0 || H < best) {
                best = H;
                best_c = static_cast<int>(c);
            }
        }
        out[static_cast<std::size_t>(i)] = v_next.at(i) + dt * best;
        arg[static_cast<std::size_t>(i)] = best_c;
    }
    for (double v : out)
        if (!std::isfinite(v)) throw NumericalError("step_backward: non-finite value");
    return {GridFunction(grid, std::move(out), slope_bound), std::move(arg)};
}

GridFunction HjbSolution::slice(std::size_t n) const {
    const auto nx = static_cast<std::size_t>(grid.n_nodes);
    return GridFunction(grid, std::vector<double>(W.begin() + static_cast<std::ptrdiff_t>(n * nx),
                                                  W.begin() + static_cast<std::ptrdiff_t>((n + 1) * nx)));
}

HjbSolution solve(const ControlProblem& problem, const LevyModel& model, const OrthoBasis& basis,
                  const SpatialGrid& grid, const HjbConfig& config, double t0, Exec exec) {
    if (!(problem.T > t0)) throw ValidationError("HJB solve: need T > t0");
    const HjbOperators ops(problem, model, basis, QuadratureRule::for_model(model, config.quad_order), config.K);

    const auto nodes = grid.nodes();
    std::vector<double> terminal(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) terminal[i] = problem.phi(nodes[i]);
    GridFunction v(grid, terminal, config.slope_bound);

    std::size_t M = config.time_steps;
    if (M == 0) {
        double rate = 0.0;
        for (int j = 0; j <= 8; ++j) rate = std::max(rate, cfl_rate(v, t0 + (problem.T - t0) * j / 8.0, ops));
        M = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((problem.T - t0) * rate / config.cfl_safety)));
    }

    HjbSolution sol;
    sol.grid = grid;
    sol.time_steps = M;
    const auto nx = nodes.size();
    sol.times.resize(M + 1);
    for (std::size_t n = 0; n <= M; ++n)
        sol.times[n] = n == M ? problem.T : t0 + (problem.T - t0) * static_cast<double>(n) / static_cast<double>(M);
    sol.W.resize((M + 1) * nx);
    sol.policy.resize(M * nx);
    std::copy(terminal.begin(), terminal.end(), sol.W.begin() + static_cast<std::ptrdiff_t>(M * nx));

    for (std::size_t n = M; n-- > 0;) {
        HjbStep step = step_backward(v, sol.times[n], sol.times[n + 1] - sol.times[n], ops, config.cfl_safety,
                                     config.slope_bound, exec);
        std::copy(step.values.values().begin(), step.values.values().end(),
                  sol.W.begin() + static_cast<std::ptrdiff_t>(n * nx));
        std::copy(step.argmin.begin(), step.argmin.end(), sol.policy.begin() + static_cast<std::ptrdiff_t>(n * nx));
        v = std::move(step.values);
    }
    return sol;
}

std::vector<ConvergenceRow> convergence_study(const ControlProblem& problem, const LevyModel& model,
                                              const OrthoBasis& basis, const std::vector<SpatialGrid>& grids,
                                              const HjbConfig& config, const std::function<double(double)>& oracle,
                                              double x_lo, double x_hi, Exec exec) {
    std::vector<ConvergenceRow> rows;
    for (std::size_t g = 0; g < grids.size(); ++g) {
        HjbConfig c = config;
        // A fixed step count is doubled along with each halving of h.
        if (config.time_steps > 0) c.time_steps = config.time_steps << g;
        const HjbSolution sol = solve(problem, model, basis, grids[g], c, 0.0, exec);
        ConvergenceRow row;
        row.h = grids[g].h();
        row.time_steps = sol.time_steps;
        row.dt = (problem.T - sol.times[0]) / static_cast<double>(sol.time_steps);
        for (int i = 0; i < grids[g].n_nodes; ++i) {
            const double x = grids[g].x(i);
            if (x < x_lo - 1e-12 || x > x_hi + 1e-12) continue;
            row.max_rel_error = std::max(row.max_rel_error, std::abs(sol.w(0, i) / oracle(x) - 1.0));
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace teugels
