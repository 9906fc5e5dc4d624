#include "teugels/bsde_solver.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "teugels/errors.hpp"

namespace teugels {

BsdeSpec BsdeSpec::linear(std::function<double(double)> terminal, LinearZDecomposition decomposition,
                          double lipschitz_y) {
    BsdeSpec spec;
    spec.terminal = std::move(terminal);
    double gnorm = 0.0;
    for (double g : decomposition.gamma) gnorm += g * g;
    spec.lipschitz_y = lipschitz_y;
    spec.lipschitz_z = std::sqrt(gnorm);
    spec.z_free = gnorm == 0.0;
    auto f1 = decomposition.f1;
    auto gamma = decomposition.gamma;
    spec.driver = [f1, gamma](double t, double x, double y, std::span<const double> z) {
        double v = f1(t, x, y);
        const std::size_t n = std::min(gamma.size(), z.size());
        for (std::size_t k = 0; k < n; ++k) v += gamma[k] * z[k];
        return v;
    };
    spec.linear_z = std::move(decomposition);
    return spec;
}

double BsdeSolution::z_mean(const ForwardEnsemble& fe, std::size_t s, int k) const {
    double acc = 0.0;
    for (std::size_t p = 0; p < N; ++p) acc += z(fe, p, s, k);
    return acc / static_cast<double>(N);
}

ForwardEnsemble levy_state(std::shared_ptr<const IncrementTable> increments, double x0) {
    ForwardEnsemble fe;
    const std::size_t N = increments->N, M = increments->M;
    fe.state.resize(N * (M + 1));
    for (std::size_t p = 0; p < N; ++p) {
        double x = x0;
        fe.state[p * (M + 1)] = x;
        for (std::size_t s = 0; s < M; ++s) {
            x += increments->dL[p * M + s];
            fe.state[p * (M + 1) + s + 1] = x;
        }
    }
    fe.increments = std::move(increments);
    return fe;
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericalError(std::string("BSDE: non-finite ") + what);
}

double mean_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

} // namespace

BsdeSolution solve_backward(const BsdeSpec& spec, const ForwardEnsemble& ensemble, const BsdeConfig& config,
                            Exec exec) {
    if (!ensemble.increments) throw ValidationError("solve_backward: ensemble has no increments");
    const IncrementTable& inc = *ensemble.increments;
    const std::size_t N = inc.N, M = inc.M;
    const int K = inc.K;
    const auto Ku = static_cast<std::size_t>(K);
    if (ensemble.state.size() != N * (M + 1)) throw ValidationError("solve_backward: state/increment size mismatch");
    if (!spec.terminal || !spec.driver) throw ValidationError("solve_backward: spec needs terminal and driver");

    BsdeSolution sol;
    sol.times = inc.times;
    sol.N = N;
    sol.M = M;
    sol.K = K;
    sol.Y.assign(N * (M + 1), 0.0);
    sol.z_fits.resize(M * Ku);
    sol.y_mean.assign(M + 1, 0.0);
    sol.y_stderr.assign(M + 1, 0.0);
    sol.z_norm_mean.assign(M, 0.0);

    const auto n = static_cast<std::ptrdiff_t>(N);
    std::vector<double> y_next(N), y_cur(N), x_cur(N), x_next(N), target(N), fa(N), y_pred(N), zbuf(N * Ku),
        ey(N), znorm(N), pathwise(N, 0.0);

    for (std::size_t p = 0; p < N; ++p) {
        x_next[p] = ensemble.x(p, M);
        y_next[p] = spec.terminal(x_next[p]);
        sol.Y[p * (M + 1) + M] = y_next[p];
    }
    require_finite(y_next, "terminal value");
    sol.y_mean[M] = mean_of(y_next);

    double eta2 = 0.0;
    for (double v : y_next) eta2 += v * v;
    eta2 /= static_cast<double>(N);
    double sup_y2 = eta2, z_energy = 0.0, f0_energy = 0.0;

    for (std::size_t si = M; si-- > 0;) {
        const std::size_t s = si;
        const double t = inc.times[s], t_next = inc.times[s + 1], dt = t_next - t;
        for (std::size_t p = 0; p < N; ++p) x_cur[p] = ensemble.x(p, s);

        const PolyRegression reg(x_cur, config.regression_degree, exec);
        if (reg.reduced()) ++sol.reduced_degree_steps;

        const PolyFit fit_y = reg.fit(y_next);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
        for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
            const auto p = static_cast<std::size_t>(pi);
            ey[p] = fit_y(x_cur[p]);
        }

        for (int k = 0; k < (config.compute_z ? K : 0); ++k) {
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
                const auto p = static_cast<std::size_t>(pi);
                target[p] = (y_next[p] - ey[p]) * inc.h(p, s)[k] / dt;
            }
            const PolyFit fz = reg.fit(target);
            sol.z_fits[s * Ku + static_cast<std::size_t>(k)] = fz;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
                const auto p = static_cast<std::size_t>(pi);
                zbuf[p * Ku + static_cast<std::size_t>(k)] = fz(x_cur[p]);
            }
        }

        PolyFit fit_final;
        if (config.scheme == BsdeScheme::explicit_euler) {
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
                const auto p = static_cast<std::size_t>(pi);
                const std::span<const double> z(zbuf.data() + p * Ku, Ku);
                target[p] = y_next[p] + spec.driver(t, x_cur[p], y_next[p], z) * dt;
            }
            require_finite(target, "driver value");
            fit_final = reg.fit(target);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
                const auto p = static_cast<std::size_t>(pi);
                y_cur[p] = fit_final(x_cur[p]);
                pathwise[p] += target[p] - y_next[p];
            }
        } else {
            // Predictor: right-point Euler. Corrector: trapezoid, with the
            // left-point driver evaluated at the predicted (F_s-measurable) Y.
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
                const auto p = static_cast<std::size_t>(pi);
                const std::span<const double> z(zbuf.data() + p * Ku, Ku);
                fa[p] = spec.driver(t_next, x_next[p], y_next[p], z);
                target[p] = y_next[p] + fa[p] * dt;
            }
            require_finite(target, "driver value");
            const PolyFit fit_pred = reg.fit(target);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
                const auto p = static_cast<std::size_t>(pi);
                y_pred[p] = fit_pred(x_cur[p]);
                target[p] = y_next[p] + 0.5 * fa[p] * dt;
            }
            fit_final = reg.fit(target);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
                const auto p = static_cast<std::size_t>(pi);
                const std::span<const double> z(zbuf.data() + p * Ku, Ku);
                const double half = 0.5 * spec.driver(t, x_cur[p], y_pred[p], z) * dt;
                y_cur[p] = fit_final(x_cur[p]) + half;
                pathwise[p] += 0.5 * fa[p] * dt + half;
            }
        }
        require_finite(y_cur, "Y");

        std::vector<double> zero_z(Ku, 0.0);
        double y2 = 0.0, zz = 0.0, f0 = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            sol.Y[p * (M + 1) + s] = y_cur[p];
            y2 += y_cur[p] * y_cur[p];
            double nz = 0.0;
            for (std::size_t k = 0; k < Ku; ++k) nz += zbuf[p * Ku + k] * zbuf[p * Ku + k];
            zz += nz;
            znorm[p] = std::sqrt(nz);
            const double f = spec.driver(t, x_cur[p], 0.0, zero_z);
            f0 += f * f;
        }
        const auto dn = static_cast<double>(N);
        sup_y2 = std::max(sup_y2, y2 / dn);
        z_energy += zz / dn * dt;
        f0_energy += f0 / dn * dt;
        sol.z_norm_mean[s] = mean_of(znorm);
        sol.y_mean[s] = mean_of(y_cur);
        sol.y_stderr[s] = fit_final.stderr();

        std::swap(y_next, y_cur);
        std::swap(x_next, x_cur);
    }

    // The ensemble mean of Y_0 equals the mean of eta + sum of the driver
    // increments used above, path by path, so that sum carries the Monte
    // Carlo error of y0.
    for (std::size_t p = 0; p < N; ++p) pathwise[p] += sol.Y[p * (M + 1) + M];
    sol.y0 = sol.y_mean[0];
    sol.y0_stderr = std::max(sol.y_stderr[0], sample_mean(pathwise).stderr);
    const double denom = eta2 + f0_energy;
    sol.a_priori_ratio = denom > 0.0 ? (sup_y2 + z_energy) / denom : 0.0;
    return sol;
}

std::vector<double> solve_linear_closed_form(const LinearBsdeOracle& oracle, std::span<const double> query_times) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 1>;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < query_times.size(); ++i) {
        if (query_times[i] > oracle.T + 1e-15) throw ValidationError("closed form: query time beyond T");
        order.emplace_back(query_times[i], i);
    }
    std::sort(order.begin(), order.end(), [](const auto& l, const auto& r) { return l.first > r.first; });

    auto rhs = [&](const State& y, State& dydt, double s) { dydt[0] = -(oracle.a(s) + oracle.b(s) * y[0]); };
    auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());

    std::vector<double> out(query_times.size());
    State y{oracle.eta};
    double t = oracle.T;
    for (const auto& [tq, idx] : order) {
        if (tq < t) {
            odeint::integrate_adaptive(stepper, rhs, y, t, tq, -1e-3);
            t = tq;
        }
        out[idx] = y[0];
    }
    return out;
}

double min_jump_functional(std::span<const double> gamma, const IncrementTable& increments) {
    const auto K = static_cast<std::size_t>(increments.K);
    const std::size_t jumps = increments.jump_sizes.size();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < jumps; ++j) {
        double v = 0.0;
        for (std::size_t k = 0; k < std::min(K, gamma.size()); ++k) v += gamma[k] * increments.jump_dH[j * K + k];
        lo = std::min(lo, v);
    }
    return lo;
}

ComparisonReport check_comparison(const BsdeSpec& low, const BsdeSpec& high, const ForwardEnsemble& ensemble,
                                  const BsdeConfig& config, Exec exec) {
    if (!low.linear_z || !high.linear_z)
        throw ValidationError("check_comparison: both drivers need a linear-in-z decomposition");
    const IncrementTable& inc = *ensemble.increments;

    ComparisonReport report;
    report.min_jump_functional_low = min_jump_functional(low.linear_z->gamma, inc);
    report.min_jump_functional_high = min_jump_functional(high.linear_z->gamma, inc);
    if (!(report.min_jump_functional_low > -1.0) || !(report.min_jump_functional_high > -1.0))
        throw AdmissibilityError("check_comparison: sum_k gamma_k dH^(k) > -1 fails on the ensemble (min " +
                                 std::to_string(std::min(report.min_jump_functional_low,
                                                         report.min_jump_functional_high)) +
                                 ")");

    const std::size_t N = inc.N, M = inc.M;
    for (std::size_t p = 0; p < N; ++p) {
        const double xT = ensemble.x(p, M);
        if (low.terminal(xT) > high.terminal(xT))
            throw ValidationError("check_comparison: terminal ordering eta <= eta' fails on path " + std::to_string(p));
    }

    const BsdeSolution a = solve_backward(low, ensemble, config, exec);
    const BsdeSolution b = solve_backward(high, ensemble, config, exec);
    report.y0_low = a.y0;
    report.y0_high = b.y0;
    for (std::size_t s = 0; s <= M; ++s) {
        const double tau = 3.0 * std::hypot(a.y_stderr[s], b.y_stderr[s]);
        for (std::size_t p = 0; p < N; ++p) {
            const double excess = a.y(p, s) - b.y(p, s);
            report.max_excess = std::max(report.max_excess, excess);
            if (excess > tau) ++report.violations;
            ++report.points;
        }
    }
    report.violation_fraction = static_cast<double>(report.violations) / static_cast<double>(report.points);
    return report;
}

} // namespace teugels
