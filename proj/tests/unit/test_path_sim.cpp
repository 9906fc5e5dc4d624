#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "teugels/errors.hpp"
#include "teugels/path_sim.hpp"
#include "teugels/rng.hpp"

using namespace teugels;
using namespace teugels::test;

TEST_SUITE("path_sim") {
    TEST_CASE("Philox4x32-10 known answers") {
        using A4 = std::array<std::uint32_t, 4>;
        CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
        CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
              A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
        CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
              A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
    }

    TEST_CASE("counter streams are reproducible and distinct") {
        CounterRng a(7, 3), b(7, 3), c(7, 4);
        for (int i = 0; i < 100; ++i) {
            const double u = a.uniform();
            CHECK(u == b.uniform());
            CHECK(u > 0.0);
            CHECK(u < 1.0);
        }
        CHECK(CounterRng(7, 3).next_u64() != c.next_u64());
    }

    TEST_CASE("simulate preconditions") {
        CHECK_THROWS_AS(simulate_ensemble(brownian(0.0, 0.0), 0.0, 1.0, 10, 5, 1), ValidationError);
        CHECK_THROWS_AS(simulate(brownian(), 1.0, 1.0, 10, 1), ValidationError);
        CHECK_THROWS_AS(simulate(brownian(), 0.0, 1.0, 0, 1), ValidationError);
    }

    TEST_CASE("Brownian paths have no jumps and centered terminal values") {
        const LevyModel m = brownian();
        const LevyPath one = simulate(m, 0.0, 1.0, 20, 11, 5);
        CHECK(one.jumps.empty());
        CHECK(one.steps() == 20);
        const auto ens = simulate_ensemble(m, 0.0, 1.0, 4, 20000, 11);
        const MeanEstimate t = terminal_mean(ens);
        CHECK(std::abs(t.mean) <= 5.0 * t.stderr);
        // A path is the same whether drawn alone or inside an ensemble.
        CHECK(simulate(m, 0.0, 1.0, 4, 11, 17).terminal_value() == ens[17].terminal_value());
    }

    TEST_CASE("Poisson jump count") {
        const LevyModel m = atoms({{1.0, 2.0}});
        const std::size_t N = 100000;
        const auto ens = simulate_ensemble(m, 0.0, 1.0, 1, N, 3);
        double count = 0.0;
        for (const auto& p : ens) count += static_cast<double>(p.jumps.size());
        count /= static_cast<double>(N);
        CHECK(std::abs(count - 2.0) <= 3.0 * std::sqrt(2.0 / static_cast<double>(N)));
    }

    TEST_CASE("Teugels increments of a Brownian path") {
        const LevyModel m = brownian();
        const OrthoBasis b = build_basis(m, 1);
        const LevyPath p = simulate(m, 0.0, 1.0, 16, 5);
        const TeugelsIncrements inc = teugels_increments(p, b, m);
        const auto dL = p.increments();
        for (std::size_t s = 0; s < p.steps(); ++s) CHECK(std::abs(inc.h(s, 1) - dL[s]) < 1e-14);
    }

    TEST_CASE("power-jump increments") {
        const LevyModel m = atoms({{1.0, 1.0}}, 1.0, 0.0, 6);
        const OrthoBasis b = build_basis(m, 2);
        const LevyPath p = simulate(m, 0.0, 1.0, 1000, 9);
        const TeugelsIncrements inc = teugels_increments(p, b, m);
        bool saw_free = false, saw_jump = false;
        for (std::size_t s = 0; s < p.steps(); ++s) {
            const double dt = p.times[s + 1] - p.times[s];
            const auto jumps = p.step_jumps(s);
            if (jumps.empty()) {
                saw_free = true;
                for (int i = 2; i <= inc.i_max; ++i) CHECK(std::abs(inc.y(s, i) + m.moment(i) * dt) < 1e-14);
            } else if (jumps.size() == 1) {
                saw_jump = true;
                // (Delta L)^2 = 1 less a compensator that vanishes with dt.
                CHECK(std::abs(inc.y(s, 2) - 1.0) <= m.moment(2) * dt + 1e-14);
            }
            // H^(k) = sum_j a_kj Y^(j) exactly.
            for (int k = 1; k <= inc.K; ++k) {
                double h = 0.0;
                for (int j = 1; j <= k; ++j) h += b.a(k, j) * inc.y(s, j);
                CHECK(std::abs(inc.h(s, k) - h) <= 1e-14 * (1.0 + std::abs(h)));
            }
        }
        CHECK(saw_free);
        CHECK(saw_jump);
    }

    TEST_CASE("L is reconstructed from H^(1)") {
        for (const LevyModel& m : {brownian(), atoms({{0.4, 2.0}, {-1.5, 0.5}}, 0.0, 0.3), benchmark(),
                                   two_sided(2.0, 0.3, 1.5, 2.5, 0.1, 0.2)}) {
            const OrthoBasis b = build_basis(m, 3);
            for (std::uint64_t path = 0; path < 5; ++path) {
                const LevyPath p = simulate(m, 0.25, 1.0, 30, 77, path);
                const TeugelsIncrements inc = teugels_increments(p, b, m);
                const auto back = reconstruct_L(inc, b, m);
                const auto orig = p.increments();
                for (std::size_t s = 0; s < orig.size(); ++s) CHECK(std::abs(back[s] - orig[s]) <= 1e-12);
            }
        }
    }

    TEST_CASE("basis built from another model is rejected") {
        const LevyModel m = brownian();
        const OrthoBasis other = build_basis(brownian(0.0, 2.0), 1);
        CHECK_THROWS_AS(teugels_increments(simulate(m, 0.0, 1.0, 4, 1), other, m), ValidationError);
    }

    TEST_CASE("empirical brackets") {
        const LevyModel bm = brownian();
        const OrthoBasis bb = build_basis(bm, 1);
        const EnsembleSummary sb = summarize_ensemble(bm, bb, 0.0, 1.0, 10, 100000, 21);
        CHECK(std::abs(sb.at(1, 1).mean - 1.0) <= 5.0 * sb.at(1, 1).stderr);

        const LevyModel mx = two_sided(1.0, 0.5, 2.0, 3.0, 0.1, 1.0);
        const OrthoBasis bx = build_basis(mx, 2);
        const EnsembleSummary sx = summarize_ensemble(mx, bx, 0.0, 1.0, 10, 100000, 22);
        CHECK(std::abs(sx.at(1, 2).mean) <= 5.0 * sx.at(1, 2).stderr);
        CHECK(std::abs(sx.at(2, 2).mean - 1.0) <= 5.0 * sx.at(2, 2).stderr);

        // The stored-ensemble route agrees with the streaming one.
        const auto paths = simulate_ensemble(mx, 0.0, 1.0, 10, 200, 22);
        std::vector<TeugelsIncrements> incs;
        for (const auto& p : paths) incs.push_back(teugels_increments(p, bx, mx));
        const EnsembleSummary small = summarize_ensemble(mx, bx, 0.0, 1.0, 10, 200, 22);
        CHECK(empirical_bracket(incs, 1, 2).mean == doctest::Approx(small.at(1, 2).mean).epsilon(1e-12));
        CHECK_THROWS_AS(empirical_bracket(std::span(incs).first(50), 1, 1), ValidationError);
    }

    TEST_CASE("concatenation") {
        const LevyModel m = benchmark();
        const LevyPath a = simulate(m, 0.0, 0.5, 5, 1);
        const LevyPath b = simulate(m, 0.5, 1.0, 5, 2);
        const LevyPath c = concatenate(a, b);
        CHECK(c.steps() == 10);
        CHECK(c.terminal_value() == doctest::Approx(a.terminal_value() + b.terminal_value()).epsilon(1e-14));
        CHECK_THROWS_AS(concatenate(b, a), ValidationError);
    }

    TEST_CASE("serial and parallel kernels agree bit for bit") {
        set_worker_count(4);
        const LevyModel m = two_sided(3.0, 0.4, 2.0, 3.0, 0.1, 0.5);
        const OrthoBasis b = build_basis(m, 3);
        const auto s = simulate_increment_table(m, b, 0.0, 1.0, 8, 3000, 5, Exec::serial);
        const auto p = simulate_increment_table(m, b, 0.0, 1.0, 8, 3000, 5, Exec::parallel);
        CHECK(s->dL == p->dL);
        CHECK(s->dH == p->dH);
        CHECK(s->jump_sizes == p->jump_sizes);
        const EnsembleSummary ss = summarize_ensemble(m, b, 0.0, 1.0, 8, 3000, 5, Exec::serial);
        const EnsembleSummary sp = summarize_ensemble(m, b, 0.0, 1.0, 8, 3000, 5, Exec::parallel);
        for (std::size_t i = 0; i < ss.bracket.size(); ++i) CHECK(ss.bracket[i].mean == sp.bracket[i].mean);
        CHECK(ss.terminal.mean == sp.terminal.mean);
    }
}
