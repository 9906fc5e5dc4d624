// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "teugels/bsde_solver.hpp"
#include "teugels/control_value.hpp"
#include "teugels/hjb_solver.hpp"
#include "teugels/path_sim.hpp"

using namespace teugels;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

const LevyModel& model() {
    static const LevyModel m(0.1, 1.0, JumpMeasure::two_sided_exponential(1.0, 0.5, 2.0, 3.0), default_i_max(3));
    return m;
}

const OrthoBasis& basis() {
    static const OrthoBasis b = build_basis(model(), 3);
    return b;
}

void BM_IncrementTable(benchmark::State& st) {
    for (auto _ : st) {
        auto t = simulate_increment_table(model(), basis(), 0.0, 1.0, 50, 20000, 1, exec_of(st));
        benchmark::DoNotOptimize(t);
    }
}

void BM_BackwardSolve(benchmark::State& st) {
    const auto table = simulate_increment_table(model(), basis(), 0.0, 1.0, 50, 20000, 1);
    const ForwardEnsemble fe = levy_state(table, 0.0);
    LinearZDecomposition d;
    d.f1 = [](double, double, double y) { return -0.5 * y; };
    d.gamma = {0.1, 0.05, 0.0};
    const BsdeSpec spec = BsdeSpec::linear([](double x) { return x; }, d, 0.5);
    for (auto _ : st) benchmark::DoNotOptimize(solve_backward(spec, fe, {}, exec_of(st)).y0);
}

void BM_HjbSolve(benchmark::State& st) {
    const ControlProblem p = ControlProblem::from_registry({"affine_u", 0.0, 0.0, 1.0}, {}, {"quadratic", 0.0, 0.0, 1.0},
                                                           {-1.0, 1.0}, 1.0, 3.0);
    HjbConfig c;
    c.K = 3;
    for (auto _ : st) benchmark::DoNotOptimize(solve(p, model(), basis(), SpatialGrid(-3.0, 3.0, 121), c, 0.0, exec_of(st)).W);
}

void BM_ValueDp(benchmark::State& st) {
    const ControlProblem p =
        ControlProblem::from_registry({"linear", 0.0, 1.0}, {}, {"linear", 0.0, 1.0}, {0.0}, 1.0, 3.0);
    McConfig mc;
    mc.paths = 5000;
    mc.substeps = 4;
    for (auto _ : st)
        benchmark::DoNotOptimize(value_dp(p, model(), basis(), {0.0, 1.0, 4, SpatialGrid(0.0, 3.0, 16)}, mc, exec_of(st)).W);
}

} // namespace

BENCHMARK(BM_IncrementTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackwardSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HjbSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValueDp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
