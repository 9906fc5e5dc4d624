#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "teugels/control_value.hpp"
#include "teugels/errors.hpp"

using namespace teugels;
using namespace teugels::test;

namespace {

ControlProblem make(ForwardSpec F, DriverSpec f, TerminalSpec phi, std::vector<double> U = {0.0}, double T = 1.0) {
    return ControlProblem::from_registry(F, f, phi, std::move(U), T, 10.0);
}

DriverSpec constant_driver(double c) {
    DriverSpec d;
    d.kind = "constant";
    d.c0 = c;
    return d;
}

McConfig mc(std::size_t paths, std::size_t substeps, std::uint64_t seed) {
    McConfig c;
    c.paths = paths;
    c.substeps = substeps;
    c.seed = seed;
    return c;
}

std::shared_ptr<const IncrementTable> table_of(const LevyModel& m, double t0, double t1, std::size_t M, std::size_t N,
                                               std::uint64_t seed) {
    return simulate_increment_table(m, build_basis(m, 3), t0, t1, M, N, seed);
}

} // namespace

TEST_SUITE("control_value") {
    TEST_CASE("forward scheme") {
        const LevyModel bm = brownian();
        const LevyPath p = simulate(bm, 0.0, 1.0, 10, 3);
        const std::vector<double> u(10, 0.0);
        const auto frozen = forward_simulate(make({"constant", 0.0}, {}, {}), u, 1.5, p);
        for (double x : frozen) CHECK(x == 1.5);
        const auto additive = forward_simulate(make({"constant", 1.0}, {}, {}), u, 1.5, p);
        CHECK(std::abs(additive.back() - (1.5 + p.terminal_value())) < 1e-13);

        // dX = X dL with unit jumps and no drift between them: X doubles at each jump.
        const LevyModel jumps = atoms({{1.0, 1.0}});
        const ControlProblem lin = make({"linear", 0.0, 1.0}, {}, {});
        for (std::uint64_t path = 0; path < 20; ++path) {
            const LevyPath q = simulate(jumps, 0.0, 2.0, 8, 5, path);
            const auto x = forward_simulate(lin, std::vector<double>(8, 0.0), 0.75, q);
            CHECK(x.back() == doctest::Approx(0.75 * std::pow(2.0, static_cast<double>(q.jumps.size()))));
        }
        CHECK_THROWS_AS(forward_simulate(lin, std::vector<double>(3, 0.0), 1.0, p), ValidationError);
    }

    TEST_CASE("ensemble forward scheme matches the per-path one") {
        const LevyModel m = benchmark();
        const OrthoBasis b = build_basis(m, 3);
        const auto paths = simulate_ensemble(m, 0.0, 1.0, 6, 50, 8);
        const auto table = std::make_shared<const IncrementTable>(build_increment_table(paths, b, m));
        const ControlProblem pr = make({"affine_u", 0.1, 0.5, 1.0}, {}, {});
        const std::vector<double> u = {1.0, -1.0, 0.0, 1.0, 1.0, -1.0};
        const ForwardEnsemble fe = forward_simulate(pr, u, 0.3, table);
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const auto x = forward_simulate(pr, u, 0.3, paths[p]);
            for (std::size_t s = 0; s <= 6; ++s) CHECK(std::abs(fe.x(p, s) - x[s]) <= 1e-13 * (1.0 + std::abs(x[s])));
        }
    }

    TEST_CASE("semigroup step examples") {
        const LevyModel m = two_sided(1.0, 0.5, 2.0, 2.0, 0.0, 1.0);
        REQUIRE(m.moment(1) == 0.0);
        const SpatialGrid g(-2.0, 2.0, 5);
        const auto nodes = g.nodes();
        const auto table = table_of(m, 0.0, 0.1, 4, 20000, 12);

        TerminalSpec c;
        c.c0 = 2.5;
        const GridFunction flat(g, std::vector<double>(5, 2.5));
        const auto constant = semigroup_step(make({"constant", 1.0}, {}, c), 0.0, flat, nullptr, nodes, table, {});
        for (const auto& v : constant) CHECK(std::abs(v.value - 2.5) < 1e-12);

        const GridFunction zero(g, std::vector<double>(5, 0.0));
        const auto integral =
            semigroup_step(make({"constant", 1.0}, constant_driver(1.0), {}), 0.0, zero, nullptr, nodes, table, {});
        for (const auto& v : integral) CHECK(std::abs(v.value - 0.1) < 1e-12);

        const GridFunction ident(g, nodes);
        const auto mart = semigroup_step(make({"constant", 1.0}, {}, {"linear", 0.0, 1.0}), 0.0, ident, nullptr, nodes,
                                         table, {});
        for (std::size_t i = 0; i < nodes.size(); ++i) CHECK(std::abs(mart[i].value - nodes[i]) <= 3.0 * mart[i].stderr);
    }

    TEST_CASE("constant problem") {
        const LevyModel m = benchmark();
        TerminalSpec c;
        c.c0 = -1.25;
        const ControlProblem pr = make({"linear", 0.0, 1.0}, {}, c, {0.0, 1.0});
        const ValueLattice lat{0.0, 1.0, 4, SpatialGrid(0.0, 2.0, 5)};
        const ValueEstimate est = value_dp(pr, m, build_basis(m, 3), lat, mc(500, 3, 1));
        for (double w : est.W) CHECK(std::abs(w + 1.25) < 1e-12);
        const RegularityReport reg = regularity_diagnostics(est);
        CHECK(reg.C_x < 1e-10);
        CHECK(reg.C_t < 1e-10);
        CHECK(reg.finite);

        DppConfig dc;
        dc.x = lat.x;
        dc.mc = mc(500, 3, 2);
        const DppResult r = dpp_residual(pr, m, build_basis(m, 3), 0.5, 1.0, 0.25, dc);
        CHECK(r.residual < 1e-10);
    }

    TEST_CASE("linear benchmark value") {
        const LevyModel m = benchmark();
        REQUIRE(m.moment(1) == doctest::Approx(0.2));
        const ControlProblem pr = make({"linear", 0.0, 1.0}, {}, {"linear", 0.0, 1.0});
        const ValueLattice lat{0.0, 1.0, 5, SpatialGrid(0.5, 2.0, 4)};
        const ValueEstimate est = value_dp(pr, m, build_basis(m, 3), lat, mc(5000, 4, 3));
        for (int i = 0; i < lat.x.n_nodes; ++i) {
            const double x = lat.x.x(i);
            CHECK(std::abs(est.w(0, i) / (x * std::exp(0.2)) - 1.0) < 0.02);
            CHECK(est.w(lat.n_slices, i) == x);
        }
        const RegularityReport reg = regularity_diagnostics(est);
        CHECK(reg.C_x_per_slice.front() == doctest::Approx(std::exp(0.2)).epsilon(0.02));
    }

    TEST_CASE("two controls near the horizon") {
        const LevyModel m = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0);
        const double delta = 0.1, T = 1.0;
        const ControlProblem pr = make({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {-1.0, 1.0}, T);
        const SpatialGrid g(-3.0, 3.0, 121);
        const ValueLattice lat{T - delta, T, 1, g};
        const ValueEstimate est = value_dp(pr, m, build_basis(m, 3), lat, mc(20000, 5, 4));
        const int mid = 60;
        REQUIRE(g.x(mid) == 0.0);
        const double m1 = m.moment(1);
        const double oracle = delta * (m.sigma2() + m.moment(2)) + m1 * m1 * delta * delta;
        // Linear interpolation of x^2 overstates it by at most h^2 / 4.
        const double h = g.h();
        CHECK(std::abs(est.w(0, mid) - oracle) <= 3.0 * est.se(0, mid) + h * h / 4.0);
    }

    TEST_CASE("enlarging the control set never raises the value") {
        const LevyModel m = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0);
        const ControlProblem small = make({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {-1.0});
        const ControlProblem large = make({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {-1.0, 1.0});
        const ValueLattice lat{0.0, 1.0, 3, SpatialGrid(-2.0, 2.0, 9)};
        const OrthoBasis b = build_basis(m, 3);
        const ValueEstimate ws = value_dp(small, m, b, lat, mc(4000, 3, 5));
        const ValueEstimate wl = value_dp(large, m, b, lat, mc(4000, 3, 5));
        for (std::size_t i = 0; i < ws.W.size(); ++i) CHECK(wl.W[i] <= ws.W[i] + 3.0 * std::hypot(ws.stderr[i], wl.stderr[i]));
    }

    TEST_CASE("single control equals a direct backward solve") {
        const LevyModel m = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 0.5);
        const OrthoBasis b = build_basis(m, 3);
        DriverSpec d;
        d.kind = "linear";
        d.c0 = 0.1;
        d.r = -0.2;
        d.gamma = {0.1, 0.05};
        const ControlProblem pr = make({"linear", 0.2, 0.5}, d, {"quadratic", 0.0, 1.0, 0.5}, {0.0});
        const ValueLattice lat{0.0, 1.0, 2, SpatialGrid(0.0, 2.0, 5)};
        const McConfig cfg = mc(2000, 4, 9);
        const ValueEstimate est = value_dp(pr, m, b, lat, cfg);

        BsdeSpec spec;
        spec.driver = [&](double t, double x, double y, std::span<const double> z) { return pr.f(t, x, y, z, 0.0); };
        const auto nodes = lat.x.nodes();
        std::vector<double> next(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) next[i] = pr.phi(nodes[i]);
        for (int l = lat.n_slices - 1; l >= 0; --l) {
            const GridFunction terminal(lat.x, next);
            spec.terminal = [&terminal](double x) { return terminal(x); };
            const auto table = simulate_increment_table(m, b, lat.time(l), lat.time(l + 1), cfg.substeps, cfg.paths,
                                                        slice_seed(cfg.seed, l));
            std::vector<double> cur(nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const ForwardEnsemble fe =
                    forward_simulate(pr, std::vector<double>(cfg.substeps, 0.0), nodes[i], table);
                cur[i] = solve_backward(spec, fe).y0;
                CHECK(std::abs(est.w(l, static_cast<int>(i)) - cur[i]) <= 1e-12);
            }
            next = cur;
        }
    }

    TEST_CASE("serial and parallel value surfaces agree bit for bit") {
        set_worker_count(4);
        const LevyModel m = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0);
        const ControlProblem pr = make({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {-1.0, 1.0});
        const ValueLattice lat{0.0, 1.0, 2, SpatialGrid(-1.0, 1.0, 5)};
        const OrthoBasis b = build_basis(m, 3);
        const ValueEstimate s = value_dp(pr, m, b, lat, mc(3000, 3, 6), Exec::serial);
        const ValueEstimate p = value_dp(pr, m, b, lat, mc(3000, 3, 6), Exec::parallel);
        CHECK(s.W == p.W);
        CHECK(s.stderr == p.stderr);
        CHECK(s.policy == p.policy);
    }

    TEST_CASE("input validation") {
        const LevyModel m = benchmark();
        const ControlProblem pr = make({"linear", 0.0, 1.0}, {}, {"linear", 0.0, 1.0});
        const ValueLattice lat{0.0, 1.0, 2, SpatialGrid(0.0, 1.0, 3)};
        CHECK_THROWS_AS(value_dp(pr, m, build_basis(m, 3), lat, mc(1, 2, 1)), ValidationError);
        CHECK_THROWS_AS(make({"linear"}, {}, {}, {}), ValidationError);
        CHECK_THROWS_AS(make({"cubic"}, {}, {}), ValidationError);
    }
}
