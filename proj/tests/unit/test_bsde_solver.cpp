#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "teugels/bsde_solver.hpp"
#include "teugels/errors.hpp"

using namespace teugels;
using namespace teugels::test;

namespace {

BsdeSpec spec_of(std::function<double(double)> terminal, DriverFn driver, bool z_free = true) {
    BsdeSpec s;
    s.terminal = std::move(terminal);
    s.driver = std::move(driver);
    s.z_free = z_free;
    return s;
}

BsdeSpec linear_spec(std::function<double(double)> terminal, double shift, double ry, std::vector<double> gamma = {}) {
    LinearZDecomposition d;
    d.f1 = [shift, ry](double, double, double y) { return shift + ry * y; };
    d.gamma = std::move(gamma);
    return BsdeSpec::linear(std::move(terminal), d, std::abs(ry));
}

ForwardEnsemble mixed_ensemble(std::size_t M, std::size_t N, std::uint64_t seed, Exec exec = Exec::parallel) {
    const LevyModel m = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0);
    const OrthoBasis b = build_basis(m, 3);
    return levy_state(simulate_increment_table(m, b, 0.0, 1.0, M, N, seed, exec), 0.0);
}

const auto zero_driver = [](double, double, double, std::span<const double>) { return 0.0; };

} // namespace

TEST_SUITE("bsde_solver") {
    TEST_CASE("constant terminal with zero driver") {
        const ForwardEnsemble fe = mixed_ensemble(10, 2000, 1);
        const BsdeSolution sol = solve_backward(spec_of([](double) { return 3.5; }, zero_driver), fe);
        for (std::size_t p = 0; p < fe.paths(); p += 97)
            for (std::size_t s = 0; s <= fe.steps(); ++s) CHECK(std::abs(sol.y(p, s) - 3.5) < 1e-12);
        for (std::size_t s = 0; s < fe.steps(); ++s)
            for (int k = 1; k <= 3; ++k) CHECK(std::abs(sol.z_mean(fe, s, k)) < 1e-12);
    }

    TEST_CASE("pure time integral") {
        const ForwardEnsemble fe = mixed_ensemble(20, 1000, 2);
        const auto one = [](double, double, double, std::span<const double>) { return 1.0; };
        for (BsdeScheme scheme : {BsdeScheme::explicit_euler, BsdeScheme::heun}) {
            BsdeConfig cfg;
            cfg.scheme = scheme;
            const BsdeSolution sol = solve_backward(spec_of([](double) { return 0.0; }, one), fe, cfg);
            CHECK(std::abs(sol.y0 - 1.0) < 1e-10);
        }
    }

    TEST_CASE("linear decay against the ODE oracle") {
        const ForwardEnsemble fe = mixed_ensemble(50, 5000, 3);
        const BsdeSolution sol = solve_backward(linear_spec([](double) { return 2.0; }, 0.0, -0.5), fe);
        CHECK(std::abs(sol.y0 - 2.0 * std::exp(-0.5)) < 2e-3);
    }

    TEST_CASE("terminal consistency and zero-driver martingale mean") {
        const ForwardEnsemble fe = mixed_ensemble(10, 20000, 4);
        const auto eta = [](double x) { return x * x - x; };
        const BsdeSolution sol = solve_backward(spec_of(eta, zero_driver, false), fe);
        double mean = 0.0;
        for (std::size_t p = 0; p < fe.paths(); ++p) {
            CHECK(sol.y(p, fe.steps()) == eta(fe.x(p, fe.steps())));
            mean += eta(fe.x(p, fe.steps()));
        }
        mean /= static_cast<double>(fe.paths());
        CHECK(std::abs(sol.y0 - mean) <= 3.0 * sol.y0_stderr);
        CHECK(sol.y0_stderr > 0.0);
    }

    TEST_CASE("closed-form linear oracle") {
        const std::vector<double> ts = {0.0, 0.25, 0.5, 1.0};
        const auto a = solve_linear_closed_form({[](double) { return 1.0; }, [](double) { return 0.0; }, 0.0, 1.0}, ts);
        for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(a[i] - (1.0 - ts[i])) < 1e-11);
        const double r = 0.7;
        const auto b = solve_linear_closed_form({[](double) { return 0.0; }, [r](double) { return -r; }, 3.0, 1.0}, ts);
        for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(b[i] - 3.0 * std::exp(-r * (1.0 - ts[i]))) < 1e-11);
        const auto c = solve_linear_closed_form({[](double s) { return s; }, [](double) { return 0.0; }, 0.0, 1.0}, ts);
        CHECK(std::abs(c[0] - 0.5) < 1e-11);
    }

    TEST_CASE("comparison examples") {
        const ForwardEnsemble fe = mixed_ensemble(20, 5000, 5);
        const auto id = [](double x) { return x; };
        const auto shifted = [](double x) { return x + 1.0; };

        const ComparisonReport same = check_comparison(linear_spec(id, 0.1, -0.3), linear_spec(id, 0.1, -0.3), fe);
        CHECK(same.violations == 0);
        CHECK(same.y0_low == same.y0_high);

        const ComparisonReport shift = check_comparison(linear_spec(id, 0.0, 0.0), linear_spec(shifted, 0.0, 0.0), fe);
        CHECK(shift.violations == 0);
        CHECK(std::abs(shift.y0_high - shift.y0_low - 1.0) < 1e-10);

        const ComparisonReport drv = check_comparison(linear_spec(id, 0.0, 0.0), linear_spec(id, 0.1, 0.0), fe);
        CHECK(drv.violations == 0);
        CHECK(std::abs(drv.y0_high - drv.y0_low - 0.1) < 1e-10);

        CHECK_THROWS_AS(check_comparison(linear_spec(shifted, 0.0, 0.0), linear_spec(id, 0.0, 0.0), fe),
                        ValidationError);
    }

    TEST_CASE("jump admissibility is enforced") {
        const ForwardEnsemble fe = mixed_ensemble(10, 2000, 6);
        const std::vector<double> bad = {-50.0, 0.0, 0.0};
        CHECK(min_jump_functional(bad, *fe.increments) <= -1.0);
        const auto id = [](double x) { return x; };
        CHECK_THROWS_AS(check_comparison(linear_spec(id, 0.0, 0.0, bad), linear_spec(id, 0.0, 0.0, bad), fe),
                        AdmissibilityError);
        const std::vector<double> none;
        CHECK(min_jump_functional(none, *fe.increments) == 0.0);
        const ForwardEnsemble smooth = levy_state(
            simulate_increment_table(brownian(), build_basis(brownian(), 1), 0.0, 1.0, 4, 200, 1), 0.0);
        CHECK(std::isinf(min_jump_functional(bad, *smooth.increments)));
    }

    TEST_CASE("serial and parallel solves agree bit for bit") {
        set_worker_count(4);
        const ForwardEnsemble s = mixed_ensemble(10, 3000, 7, Exec::serial);
        const ForwardEnsemble p = mixed_ensemble(10, 3000, 7, Exec::parallel);
        const BsdeSpec spec = linear_spec([](double x) { return std::sin(x); }, 0.2, -0.4, {0.1, 0.05, 0.0});
        const BsdeSolution a = solve_backward(spec, s, {}, Exec::serial);
        const BsdeSolution b = solve_backward(spec, p, {}, Exec::parallel);
        CHECK(a.Y == b.Y);
        CHECK(a.y0 == b.y0);
        CHECK(a.y0_stderr == b.y0_stderr);
    }
}
