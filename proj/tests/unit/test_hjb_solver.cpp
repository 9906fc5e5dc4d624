#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "teugels/errors.hpp"
#include "teugels/hjb_solver.hpp"

using namespace teugels;
using namespace teugels::test;

namespace {

ControlProblem make(ForwardSpec F, DriverSpec f, TerminalSpec phi, std::vector<double> U = {0.0}) {
    return ControlProblem::from_registry(F, f, phi, std::move(U), 1.0, 10.0);
}

GridFunction sample(const SpatialGrid& g, const std::function<double(double)>& v) {
    std::vector<double> vals(static_cast<std::size_t>(g.n_nodes));
    for (int i = 0; i < g.n_nodes; ++i) vals[static_cast<std::size_t>(i)] = v(g.x(i));
    return GridFunction(g, vals);
}

struct Setup {
    LevyModel model;
    OrthoBasis basis;
    ControlProblem problem;
    HjbOperators ops;
    Setup(LevyModel m, ControlProblem p, int K = 3)
        : model(std::move(m)), basis(build_basis(model, K)), problem(std::move(p)),
          ops(problem, model, basis, QuadratureRule::for_model(model), std::min(K, basis.rank())) {}
};

} // namespace

TEST_SUITE("quadrature") {
    TEST_CASE("Gauss-Laguerre integrates polynomials exactly") {
        std::vector<double> y, w;
        gauss_laguerre(16, y, w);
        double fact = 1.0;
        for (int k = 0; k <= 20; ++k) {
            if (k > 0) fact *= k;
            double s = 0.0;
            for (std::size_t q = 0; q < y.size(); ++q) s += w[q] * std::pow(y[q], k);
            CHECK(std::abs(s / fact - 1.0) < 1e-11);
        }
    }

    TEST_CASE("rules reproduce the moment table") {
        for (const LevyModel& m : {benchmark(), two_sided(1.0, 0.5, 2.0, 3.0), two_sided(2.5, 0.2, 0.8, 4.0)}) {
            const QuadratureRule q = QuadratureRule::for_model(m);
            CHECK(std::abs(q.mass() - m.jumps().total_mass()) < 1e-12);
            for (int i = 2; i <= 8; ++i) CHECK(std::abs(q.moment(i) - m.moment(i)) <= 1e-9 * std::abs(m.moment(i)));
        }
        CHECK(QuadratureRule::for_model(brownian()).size() == 0);
    }
}

TEST_SUITE("hjb_solver") {
    TEST_CASE("generator on constants, lines and parabolas") {
        const Setup s(benchmark(), make({"constant", 1.0}, {}, {}));
        const SpatialGrid g(-3.0, 3.0, 61);
        const double m1 = s.model.moment(1);
        for (double x : {-1.0, 0.0, 0.5, 2.0}) {
            CHECK(std::abs(generator_Lu(sample(g, [](double) { return 4.0; }), x, 0.0, 0.0, s.ops)) < 1e-12);
            CHECK(std::abs(generator_Lu(sample(g, [](double y) { return 2.5 * y; }), x, 0.0, 0.0, s.ops) - m1 * 2.5) <
                  1e-10);
            const double expected = 2.0 * m1 * x + s.model.sigma2() + s.model.moment(2);
            CHECK(std::abs(generator_Lu(sample(g, [](double y) { return y * y; }), x, 0.0, 0.0, s.ops) - expected) <
                  1e-6);
        }
    }

    TEST_CASE("Teugels coefficient operators") {
        const Setup s(atoms({{0.2, 1.0}}, 1.0), make({"constant", 1.0}, {}, {}), 2);
        REQUIRE(s.basis.rank() == 2);
        const SpatialGrid g(-3.0, 3.0, 61);
        const double a11 = s.basis.a(1, 1);
        const QuadratureRule& q = s.ops.quadrature();
        for (double x : {-0.5, 0.0, 1.3}) {
            for (int k = 1; k <= 2; ++k)
                CHECK(std::abs(operator_Luk(sample(g, [](double) { return -1.0; }), x, 0.0, k, 0.0, s.ops)) < 1e-12);
            const GridFunction line = sample(g, [](double y) { return 3.0 * y; });
            CHECK(std::abs(operator_Luk(line, x, 0.0, 1, 0.0, s.ops) - 3.0 / a11) < 1e-10);
            CHECK(std::abs(operator_Luk(line, x, 0.0, 2, 0.0, s.ops)) < 1e-10);
            double jump = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) jump += q.weights[i] * q.nodes[i] * q.nodes[i] * s.basis.eval_p(1, q.nodes[i]);
            const double got = operator_Luk(sample(g, [](double y) { return y * y; }), x, 0.0, 1, 0.0, s.ops);
            CHECK(std::abs(got - (2.0 * x / a11 + jump)) < 1e-6);
        }
        CHECK_THROWS(operator_Luk(sample(g, [](double) { return 0.0; }), 0.0, 0.0, 3, 0.0, s.ops));
    }

    TEST_CASE("Hamiltonian examples") {
        const SpatialGrid g(-3.0, 3.0, 61);
        const Setup zero(benchmark(), make({"constant", 1.0}, {}, {}));
        CHECK(std::abs(hamiltonian(sample(g, [](double) { return 2.0; }), 0.3, 0.0, 0.0, zero.ops)) < 1e-12);
        DriverSpec d;
        d.kind = "linear";
        d.r = -0.5;
        const Setup decay(benchmark(), make({"constant", 1.0}, d, {}));
        CHECK(std::abs(hamiltonian(sample(g, [](double) { return 2.0; }), 0.3, 0.0, 0.0, decay.ops) + 1.0) < 1e-12);
        for (int i = 0; i < g.n_nodes; ++i)
            CHECK(std::abs(hamiltonian(sample(g, [](double y) { return y; }), g.x(i), 0.0, 0.0, zero.ops) - 0.2) < 1e-10);
    }

    TEST_CASE("single explicit steps") {
        const SpatialGrid g(0.0, 4.0, 41);
        const Setup lin(benchmark(), make({"linear", 0.0, 1.0}, {}, {"linear", 0.0, 1.0}));
        const GridFunction v = sample(g, [](double x) { return x; });
        const double dt = 0.5 / cfl_rate(v, 0.9, lin.ops);
        const HjbStep st = step_backward(v, 0.9, dt, lin.ops, 0.9);
        for (int i = 0; i < g.n_nodes; ++i)
            CHECK(std::abs(st.values.at(i) - g.x(i) * (1.0 + 0.2 * dt)) < 1e-12 * (1.0 + g.x(i)));
        CHECK_THROWS_AS(step_backward(v, 0.9, 20.0 * dt, lin.ops, 0.9), NumericalError);

        const GridFunction c = sample(g, [](double) { return 1.75; });
        const HjbStep cs = step_backward(c, 0.9, dt, lin.ops, 0.9);
        for (double x : cs.values.values()) CHECK(x == doctest::Approx(1.75).epsilon(1e-15));

        // Two controls with the same Hamiltonian: the first one is kept.
        const Setup tie(benchmark(), make({"affine_u", 1.0, 0.0, 0.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {0.0, 1.0}));
        const HjbStep ts = step_backward(sample(g, [](double x) { return x * x; }), 0.9, dt, tie.ops, 0.9);
        for (int a : ts.argmin) CHECK(a == 0);
    }

    TEST_CASE("explicit step is monotone under the CFL bound") {
        const SpatialGrid g(-2.0, 2.0, 41);
        const Setup s(two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0),
                      make({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {-1.0, 1.0}));
        const GridFunction base = sample(g, [](double x) { return x * x + 0.3 * std::sin(3.0 * x); });
        const double dt = 0.9 / cfl_rate(base, 0.5, s.ops);
        const HjbStep ref = step_backward(base, 0.5, dt, s.ops, 0.9);
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> bump(0.0, 0.05);
        for (int trial = 0; trial < 10; ++trial) {
            GridFunction up = base;
            for (double& x : up.mutable_values()) x += bump(rng);
            const HjbStep st = step_backward(up, 0.5, dt, s.ops, 0.9);
            for (int i = 0; i < g.n_nodes; ++i) CHECK(st.values.at(i) >= ref.values.at(i) - 1e-14);
        }
    }

    TEST_CASE("full solves") {
        const LevyModel bm = benchmark();
        const OrthoBasis bb = build_basis(bm, 3);
        HjbConfig cfg;
        cfg.K = 3;
        TerminalSpec c;
        c.c0 = 0.4;
        const SpatialGrid g(0.0, 4.0, 41);
        const HjbSolution flat = solve(make({"linear", 0.0, 1.0}, {}, c), bm, bb, g, cfg);
        for (double w : flat.W) CHECK(w == doctest::Approx(0.4).epsilon(1e-14));

        const HjbSolution lin = solve(make({"linear", 0.0, 1.0}, {}, {"linear", 0.0, 1.0}), bm, bb, g, cfg);
        CHECK(lin.times.front() == 0.0);
        for (int i = 0; i < g.n_nodes; ++i) CHECK(lin.w(lin.time_steps, i) == g.x(i));
        for (int i = 10; i <= 30; ++i) CHECK(std::abs(lin.w(0, i) / (g.x(i) * std::exp(0.2)) - 1.0) < 0.01);

        const LevyModel mx = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0);
        const SpatialGrid sym(-2.0, 2.0, 41);
        const HjbSolution two = solve(make({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {-1.0, 1.0}),
                                      mx, build_basis(mx, 3), sym, cfg);
        for (std::size_t n = 0; n <= two.time_steps; ++n)
            for (int i = 0; i < sym.n_nodes; ++i) CHECK(std::abs(two.w(n, i) - two.w(n, sym.n_nodes - 1 - i)) < 1e-8);
    }

    TEST_CASE("convergence study refines") {
        const LevyModel bm = benchmark();
        HjbConfig cfg;
        cfg.K = 3;
        cfg.time_steps = 200;
        const std::vector<SpatialGrid> grids = {SpatialGrid(0.0, 4.0, 21), SpatialGrid(0.0, 4.0, 41),
                                                SpatialGrid(0.0, 4.0, 81)};
        const auto rows = convergence_study(make({"linear", 0.0, 1.0}, {}, {"linear", 0.0, 1.0}), bm,
                                            build_basis(bm, 3), grids, cfg,
                                            [](double x) { return x * std::exp(0.2); }, 1.0, 3.0);
        REQUIRE(rows.size() == 3);
        CHECK(rows[1].time_steps == 2 * rows[0].time_steps);
        CHECK(rows[1].max_rel_error < rows[0].max_rel_error);
        CHECK(rows[2].max_rel_error < rows[1].max_rel_error);
    }

    TEST_CASE("serial and parallel solves agree bit for bit") {
        set_worker_count(4);
        const LevyModel mx = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0);
        const ControlProblem pr = make({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0}, {-1.0, 1.0});
        HjbConfig cfg;
        cfg.K = 2;
        const SpatialGrid g(-2.0, 2.0, 21);
        const HjbSolution a = solve(pr, mx, build_basis(mx, 3), g, cfg, 0.0, Exec::serial);
        const HjbSolution b = solve(pr, mx, build_basis(mx, 3), g, cfg, 0.0, Exec::parallel);
        CHECK(a.W == b.W);
        CHECK(a.policy == b.policy);
    }
}
