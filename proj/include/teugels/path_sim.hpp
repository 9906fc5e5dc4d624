#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "teugels/exec.hpp"
#include "teugels/levy_model.hpp"
#include "teugels/teugels_basis.hpp"

namespace teugels {

struct Jump {
    double time = 0.0;
    double size = 0.0;
};

/// One discretized Levy path with explicit jump records.
///
/// Step s covers (times[s], times[s+1]]; its increment is
/// drift_rate * dt + diffusion_increments[s] + (sum of jumps in the step).
struct LevyPath {
    std::vector<double> times;
    std::vector<double> diffusion_increments;
    std::vector<Jump> jumps;               // sorted by time, all in (t_start, T]
    std::vector<std::size_t> step_offsets; // jumps of step s: [step_offsets[s], step_offsets[s+1])
    double drift_rate = 0.0;

    std::size_t steps() const { return diffusion_increments.size(); }
    std::span<const Jump> step_jumps(std::size_t s) const {
        return {jumps.data() + step_offsets[s], step_offsets[s + 1] - step_offsets[s]};
    }
    /// Per-step increments of L.
    std::vector<double> increments() const;
    double terminal_value() const; // L_T - L_{t_start}
};

/// Exact compound-Poisson + Gaussian path; the draws come from the counter-based
/// stream (seed, path_index) so a path is reproducible in isolation. The model
/// is not re-validated here; the ensemble entry points do that once.
LevyPath simulate(const LevyModel& model, double t_start, double T, std::size_t M, std::uint64_t seed,
                  std::uint64_t path_index = 0);

/// N independent paths (path p uses stream p).
std::vector<LevyPath> simulate_ensemble(const LevyModel& model, double t_start, double T, std::size_t M,
                                        std::size_t N, std::uint64_t seed, Exec exec = Exec::parallel);

/// Glue b onto the end of a (b must start where a ends, same drift).
LevyPath concatenate(const LevyPath& a, const LevyPath& b);

/// Compensated power-jump and Teugels increments of one path.
struct TeugelsIncrements {
    std::vector<double> times;
    int K = 0;
    int i_max = 0;
    std::vector<double> dH;      // steps x K
    std::vector<double> dY;      // steps x i_max, column i-1 holds dY^(i)
    std::vector<double> jump_dH; // jumps x K, the jumps p_k(size) of H^(k)
    std::vector<double> a_first_column; // a_{k1}, k = 1..K
    double sigma2 = 0.0;

    std::size_t steps() const { return times.size() - 1; }
    double horizon() const { return times.back() - times.front(); }
    double h(std::size_t s, int k) const { return dH[s * static_cast<std::size_t>(K) + static_cast<std::size_t>(k - 1)]; }
    double y(std::size_t s, int i) const { return dY[s * static_cast<std::size_t>(i_max) + static_cast<std::size_t>(i - 1)]; }
};

TeugelsIncrements teugels_increments(const LevyPath& path, const OrthoBasis& basis, const LevyModel& model);

/// dL_s = dH^(1)_s / a_11 + m_1 dt_s.
std::vector<double> reconstruct_L(const TeugelsIncrements& incr, const OrthoBasis& basis, const LevyModel& model);

struct MeanEstimate {
    double mean = 0.0;
    double stderr = 0.0;
};

/// Mean of the samples with its standard error (fixed summation order).
MeanEstimate sample_mean(std::span<const double> values);

/// [H^(i), H^(j)]_T / T on one path.
double realized_bracket(const TeugelsIncrements& incr, int i, int j);

/// Realized covariation [H^(i), H^(j)]_T / T averaged over the ensemble:
/// sum over jumps of p_i p_j plus the continuous part a_i1 a_j1 sigma^2 T.
MeanEstimate empirical_bracket(std::span<const TeugelsIncrements> ensemble, int i, int j);

/// Ensemble mean of L_T - L_{t_start} with its standard error.
MeanEstimate terminal_mean(std::span<const LevyPath> paths);

/// Bracket matrix and terminal mean of N paths, simulated one at a time so
/// that memory does not grow with the per-path increment tables.
struct EnsembleSummary {
    int K = 0;
    std::size_t N = 0;
    std::vector<MeanEstimate> bracket; // K x K
    MeanEstimate terminal;             // L_T - L_{t_start}

    const MeanEstimate& at(int i, int j) const {
        return bracket[static_cast<std::size_t>((i - 1) * K + (j - 1))];
    }
};

EnsembleSummary summarize_ensemble(const LevyModel& model, const OrthoBasis& basis, double t_start, double T,
                                   std::size_t M, std::size_t N, std::uint64_t seed, Exec exec = Exec::parallel);

/// Dense per-step view of an ensemble, the input of the BSDE and control
/// kernels. All arrays are path-major.
struct IncrementTable {
    std::vector<double> times; // M + 1
    std::size_t N = 0;
    std::size_t M = 0;
    int K = 0;
    std::vector<double> continuous;        // N x M: drift*dt + sigma dW
    std::vector<double> dL;                // N x M
    std::vector<double> dH;                // N x M x K
    std::vector<std::size_t> jump_offsets; // N*M + 1, into jump_sizes
    std::vector<double> jump_sizes;
    std::vector<double> jump_dH; // jumps x K

    double dt(std::size_t s) const { return times[s + 1] - times[s]; }
    const double* h(std::size_t path, std::size_t s) const {
        return dH.data() + (path * M + s) * static_cast<std::size_t>(K);
    }
    std::span<const double> step_jumps(std::size_t path, std::size_t s) const {
        const std::size_t c = path * M + s;
        return {jump_sizes.data() + jump_offsets[c], jump_offsets[c + 1] - jump_offsets[c]};
    }
};

IncrementTable build_increment_table(std::span<const LevyPath> paths, const OrthoBasis& basis,
                                     const LevyModel& model, Exec exec = Exec::parallel);

/// Simulate and tabulate in one go (paths are not retained).
std::shared_ptr<const IncrementTable> simulate_increment_table(const LevyModel& model, const OrthoBasis& basis,
                                                               double t_start, double T, std::size_t M,
                                                               std::size_t N, std::uint64_t seed,
                                                               Exec exec = Exec::parallel);

} // namespace teugels
