#include "teugels/path_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "teugels/errors.hpp"
#include "teugels/rng.hpp"

namespace teugels {

namespace {

double sample_jump_size(const JumpMeasure& nu, CounterRng& rng) {
    switch (nu.kind) {
    case JumpKind::point_masses: {
        double total = 0.0;
        for (const auto& a : nu.atoms) total += a.intensity;
        double u = rng.uniform() * total;
        for (const auto& a : nu.atoms) {
            if (u < a.intensity) return a.location;
            u -= a.intensity;
        }
        return nu.atoms.back().location;
    }
    case JumpKind::two_sided_exponential: {
        const auto& e = nu.exponential;
        if (rng.uniform() < e.p) return rng.exponential(e.alpha);
        return -rng.exponential(e.beta);
    }
    case JumpKind::none:
        break;
    }
    return 0.0;
}

} // namespace

MeanEstimate sample_mean(std::span<const double> values) {
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

std::vector<double> LevyPath::increments() const {
    std::vector<double> out(steps());
    for (std::size_t s = 0; s < steps(); ++s) {
        double inc = drift_rate * (times[s + 1] - times[s]) + diffusion_increments[s];
        for (const auto& j : step_jumps(s)) inc += j.size;
        out[s] = inc;
    }
    return out;
}

double LevyPath::terminal_value() const {
    double total = 0.0;
    for (double v : increments()) total += v;
    return total;
}

LevyPath simulate(const LevyModel& model, double t_start, double T, std::size_t M, std::uint64_t seed,
                  std::uint64_t path_index) {
    if (!(T > t_start)) throw ValidationError("simulate: need T > t_start");
    if (M < 1) throw ValidationError("simulate: need M >= 1");

    LevyPath path;
    path.drift_rate = model.simulated_drift_rate();
    path.times.resize(M + 1);
    const double span = T - t_start;
    for (std::size_t s = 0; s <= M; ++s) path.times[s] = t_start + span * static_cast<double>(s) / static_cast<double>(M);
    path.times[M] = T;

    CounterRng rng(seed, path_index);
    path.diffusion_increments.resize(M);
    const double sigma = std::sqrt(model.sigma2());
    for (std::size_t s = 0; s < M; ++s) {
        const double dt = path.times[s + 1] - path.times[s];
        path.diffusion_increments[s] = sigma > 0.0 ? sigma * std::sqrt(dt) * rng.normal() : 0.0;
    }

    const double intensity = model.jumps().total_mass();
    if (intensity > 0.0) {
        double t = t_start;
        for (;;) {
            t += rng.exponential(intensity);
            if (t > T) break;
            path.jumps.push_back({t, sample_jump_size(model.jumps(), rng)});
        }
    }

    path.step_offsets.assign(M + 1, 0);
    std::size_t j = 0;
    for (std::size_t s = 0; s < M; ++s) {
        path.step_offsets[s] = j;
        while (j < path.jumps.size() && path.jumps[j].time <= path.times[s + 1]) ++j;
    }
    path.step_offsets[M] = j;
    return path;
}

std::vector<LevyPath> simulate_ensemble(const LevyModel& model, double t_start, double T, std::size_t M,
                                        std::size_t N, std::uint64_t seed, Exec exec) {
    require_valid(model);
    if (N < 1) throw ValidationError("simulate_ensemble: need N >= 1");
    std::vector<LevyPath> out(N);
    const auto n = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (std::ptrdiff_t p = 0; p < n; ++p)
        out[static_cast<std::size_t>(p)] = simulate(model, t_start, T, M, seed, static_cast<std::uint64_t>(p));
    return out;
}

LevyPath concatenate(const LevyPath& a, const LevyPath& b) {
    if (std::abs(a.times.back() - b.times.front()) > 1e-12 * (1.0 + std::abs(a.times.back())))
        throw ValidationError("concatenate: paths are not adjacent in time");
    LevyPath out;
    out.drift_rate = a.drift_rate;
    out.times = a.times;
    out.times.insert(out.times.end(), b.times.begin() + 1, b.times.end());
    out.diffusion_increments = a.diffusion_increments;
    out.diffusion_increments.insert(out.diffusion_increments.end(), b.diffusion_increments.begin(),
                                    b.diffusion_increments.end());
    out.jumps = a.jumps;
    out.jumps.insert(out.jumps.end(), b.jumps.begin(), b.jumps.end());
    out.step_offsets.assign(a.step_offsets.begin(), a.step_offsets.end() - 1);
    const std::size_t shift = a.jumps.size();
    for (std::size_t off : b.step_offsets) out.step_offsets.push_back(off + shift);
    return out;
}

TeugelsIncrements teugels_increments(const LevyPath& path, const OrthoBasis& basis, const LevyModel& model) {
    if (basis.model_fingerprint() != model.fingerprint())
        throw ValidationError("teugels_increments: basis was built from a different model");

    TeugelsIncrements out;
    out.times = path.times;
    out.K = basis.rank();
    out.i_max = model.i_max();
    out.sigma2 = model.sigma2();
    const std::size_t M = path.steps();
    const auto K = static_cast<std::size_t>(out.K);
    const auto I = static_cast<std::size_t>(out.i_max);
    out.dY.assign(M * I, 0.0);
    out.dH.assign(M * K, 0.0);
    out.jump_dH.assign(path.jumps.size() * K, 0.0);
    out.a_first_column.resize(K);
    for (int k = 1; k <= out.K; ++k) out.a_first_column[static_cast<std::size_t>(k - 1)] = basis.a(k, 1);

    std::vector<double> m(I + 1, 0.0);
    for (int i = 1; i <= out.i_max; ++i) m[static_cast<std::size_t>(i)] = model.moment(i);

    const auto inc = path.increments();
    for (std::size_t s = 0; s < M; ++s) {
        const double dt = path.times[s + 1] - path.times[s];
        double* dy = out.dY.data() + s * I;
        dy[0] = inc[s] - m[1] * dt;
        for (std::size_t i = 2; i <= I; ++i) {
            double power_sum = 0.0;
            for (const auto& j : path.step_jumps(s)) power_sum += std::pow(j.size, static_cast<double>(i));
            dy[i - 1] = power_sum - m[i] * dt;
        }
        double* dh = out.dH.data() + s * K;
        for (int k = 1; k <= out.K; ++k) {
            double acc = 0.0;
            for (int j = 1; j <= k; ++j) acc += basis.a(k, j) * dy[j - 1];
            dh[k - 1] = acc;
        }
    }
    for (std::size_t j = 0; j < path.jumps.size(); ++j) basis.eval_p_all(path.jumps[j].size, out.jump_dH.data() + j * K);
    return out;
}

std::vector<double> reconstruct_L(const TeugelsIncrements& incr, const OrthoBasis& basis, const LevyModel& model) {
    const double a11 = basis.a(1, 1);
    const double m1 = model.moment(1);
    std::vector<double> out(incr.steps());
    for (std::size_t s = 0; s < incr.steps(); ++s)
        out[s] = incr.h(s, 1) / a11 + m1 * (incr.times[s + 1] - incr.times[s]);
    return out;
}

double realized_bracket(const TeugelsIncrements& e, int i, int j) {
    if (i < 1 || j < 1 || i > e.K || j > e.K) throw ValidationError("realized_bracket: index exceeds basis rank");
    const auto k = static_cast<std::size_t>(e.K);
    const auto iu = static_cast<std::size_t>(i - 1), ju = static_cast<std::size_t>(j - 1);
    const std::size_t jumps = e.jump_dH.size() / k;
    double qv = e.a_first_column[iu] * e.a_first_column[ju] * e.sigma2 * e.horizon();
    for (std::size_t n = 0; n < jumps; ++n) qv += e.jump_dH[n * k + iu] * e.jump_dH[n * k + ju];
    return qv / e.horizon();
}

MeanEstimate empirical_bracket(std::span<const TeugelsIncrements> ensemble, int i, int j) {
    if (ensemble.size() < 100) throw ValidationError("empirical_bracket: need at least 100 paths");
    std::vector<double> values(ensemble.size());
    for (std::size_t p = 0; p < ensemble.size(); ++p) values[p] = realized_bracket(ensemble[p], i, j);
    return sample_mean(values);
}

EnsembleSummary summarize_ensemble(const LevyModel& model, const OrthoBasis& basis, double t_start, double T,
                                   std::size_t M, std::size_t N, std::uint64_t seed, Exec exec) {
    if (N < 100) throw ValidationError("summarize_ensemble: need at least 100 paths");
    const int K = basis.rank();
    const auto Ku = static_cast<std::size_t>(K);
    std::vector<double> br(N * Ku * Ku), term(N);
    const auto n = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
        const auto p = static_cast<std::size_t>(pi);
        const LevyPath path = simulate(model, t_start, T, M, seed, p);
        const TeugelsIncrements inc = teugels_increments(path, basis, model);
        term[p] = path.terminal_value();
        for (int i = 1; i <= K; ++i)
            for (int j = 1; j <= K; ++j)
                br[(p * Ku + static_cast<std::size_t>(i - 1)) * Ku + static_cast<std::size_t>(j - 1)] =
                    realized_bracket(inc, i, j);
    }
    EnsembleSummary s;
    s.K = K;
    s.N = N;
    s.bracket.resize(Ku * Ku);
    std::vector<double> col(N);
    for (std::size_t c = 0; c < Ku * Ku; ++c) {
        for (std::size_t p = 0; p < N; ++p) col[p] = br[p * Ku * Ku + c];
        s.bracket[c] = sample_mean(col);
    }
    s.terminal = sample_mean(term);
    return s;
}

MeanEstimate terminal_mean(std::span<const LevyPath> paths) {
    std::vector<double> values(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) values[p] = paths[p].terminal_value();
    return sample_mean(values);
}

IncrementTable build_increment_table(std::span<const LevyPath> paths, const OrthoBasis& basis,
                                     const LevyModel& model, Exec exec) {
    if (basis.model_fingerprint() != model.fingerprint())
        throw ValidationError("build_increment_table: basis was built from a different model");
    if (paths.empty()) throw ValidationError("build_increment_table: empty ensemble");

    IncrementTable t;
    t.times = paths.front().times;
    t.N = paths.size();
    t.M = paths.front().steps();
    t.K = basis.rank();
    const std::size_t N = t.N, M = t.M;
    const auto K = static_cast<std::size_t>(t.K);
    const int i_need = t.K; // dH^(k) uses dY^(1..k)

    t.continuous.assign(N * M, 0.0);
    t.dL.assign(N * M, 0.0);
    t.dH.assign(N * M * K, 0.0);
    t.jump_offsets.assign(N * M + 1, 0);

    std::vector<std::size_t> path_first(N + 1, 0);
    for (std::size_t p = 0; p < N; ++p) {
        if (paths[p].steps() != M) throw ValidationError("build_increment_table: ragged ensemble");
        path_first[p + 1] = path_first[p] + paths[p].jumps.size();
    }
    t.jump_sizes.assign(path_first[N], 0.0);
    t.jump_dH.assign(path_first[N] * K, 0.0);

    std::vector<double> m(static_cast<std::size_t>(i_need) + 1, 0.0);
    for (int i = 1; i <= i_need; ++i) m[static_cast<std::size_t>(i)] = model.moment(i);
    std::vector<double> a(K * K);
    for (int r = 1; r <= t.K; ++r)
        for (int c = 1; c <= t.K; ++c) a[static_cast<std::size_t>((r - 1) * t.K + (c - 1))] = basis.a(r, c);

    const auto n = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
        const auto p = static_cast<std::size_t>(pi);
        const LevyPath& path = paths[p];
        std::vector<double> dy(static_cast<std::size_t>(i_need));
        std::size_t jpos = path_first[p];
        for (std::size_t s = 0; s < M; ++s) {
            const double dt = t.times[s + 1] - t.times[s];
            const double cont = path.drift_rate * dt + path.diffusion_increments[s];
            double dl = cont;
            std::fill(dy.begin(), dy.end(), 0.0);
            const std::size_t cell = p * M + s;
            t.jump_offsets[cell] = jpos; // final prefix fixed up below for cell 0 of each path
            for (const auto& jmp : path.step_jumps(s)) {
                dl += jmp.size;
                double pw = jmp.size;
                for (int i = 2; i <= i_need; ++i) {
                    pw *= jmp.size;
                    dy[static_cast<std::size_t>(i - 1)] += pw;
                }
                t.jump_sizes[jpos] = jmp.size;
                basis.eval_p_all(jmp.size, t.jump_dH.data() + jpos * K);
                ++jpos;
            }
            dy[0] = dl - m[1] * dt;
            for (int i = 2; i <= i_need; ++i) dy[static_cast<std::size_t>(i - 1)] -= m[static_cast<std::size_t>(i)] * dt;
            t.continuous[cell] = cont;
            t.dL[cell] = dl;
            double* dh = t.dH.data() + cell * K;
            for (std::size_t k = 0; k < K; ++k) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= k; ++j) acc += a[k * K + j] * dy[j];
                dh[k] = acc;
            }
        }
    }
    t.jump_offsets[N * M] = path_first[N];
    return t;
}

std::shared_ptr<const IncrementTable> simulate_increment_table(const LevyModel& model, const OrthoBasis& basis,
                                                               double t_start, double T, std::size_t M,
                                                               std::size_t N, std::uint64_t seed, Exec exec) {
    const auto paths = simulate_ensemble(model, t_start, T, M, N, seed, exec);
    return std::make_shared<const IncrementTable>(build_increment_table(paths, basis, model, exec));
}

} // namespace teugels
