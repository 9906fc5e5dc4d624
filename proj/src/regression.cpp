#include "teugels/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "teugels/errors.hpp"

namespace teugels {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1>;

// Sum f(i, partial) over i in [0, n) with fixed-size blocks reduced in index
// order, so the result does not depend on the number of workers.
template <std::size_t W, typename F>
std::array<double, W> ordered_block_sum(std::size_t n, Exec exec, F&& accumulate) {
    const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<std::array<double, W>> partial(blocks, std::array<double, W>{});
    const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        auto& acc = partial[static_cast<std::size_t>(b)];
        for (std::size_t i = lo; i < hi; ++i) accumulate(i, acc);
    }
    std::array<double, W> total{};
    for (const auto& p : partial)
        for (std::size_t w = 0; w < W; ++w) total[w] += p[w];
    return total;
}

constexpr std::size_t kP = kMaxRegressionDegree + 1;

} // namespace

double PolyFit::stderr() const {
    if (samples == 0) return 0.0;
    return std::sqrt(residual_variance * static_cast<double>(basis_size()) / static_cast<double>(samples));
}

PolyRegression::PolyRegression(std::span<const double> state, int degree, Exec exec)
    : state_(state), exec_(exec) {
    if (state.empty()) throw ValidationError("regression: empty sample");
    if (degree < 0 || degree > kMaxRegressionDegree) throw ValidationError("regression: degree out of range");
    const std::size_t n = state.size();

    const auto moments = ordered_block_sum<2>(n, exec, [&](std::size_t i, std::array<double, 2>& acc) {
        acc[0] += state[i];
    });
    center_ = moments[0] / static_cast<double>(n);
    const auto spread = ordered_block_sum<1>(n, exec, [&](std::size_t i, std::array<double, 1>& acc) {
        const double d = state[i] - center_;
        acc[0] += d * d;
    });
    const double sd = std::sqrt(spread[0] / static_cast<double>(n));
    if (!std::isfinite(center_) || !std::isfinite(sd)) throw NumericalError("regression: non-finite state");

    if (!(sd > 1e-12 * (1.0 + std::abs(center_)))) {
        degree_ = 0;
        reduced_ = degree > 0;
        scale_ = 1.0;
        normal_[0] = 1.0;
        return;
    }
    scale_ = sd;

    // Power sums of the standardized state up to 2*degree.
    constexpr std::size_t kPow = 2 * kMaxRegressionDegree + 1;
    const auto sums = ordered_block_sum<kPow>(n, exec, [&](std::size_t i, std::array<double, kPow>& acc) {
        const double u = (state[i] - center_) / scale_;
        double p = 1.0;
        for (std::size_t d = 0; d < kPow; ++d) {
            acc[d] += p;
            p *= u;
        }
    });

    for (int d = degree; d >= 0; --d) {
        const auto P = static_cast<Eigen::Index>(d + 1);
        Mat g(P, P);
        for (Eigen::Index r = 0; r < P; ++r)
            for (Eigen::Index c = 0; c < P; ++c) g(r, c) = sums[static_cast<std::size_t>(r + c)] / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Mat> eig(g, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (d == 0 || lo > 1e-11 * hi) {
            degree_ = d;
            reduced_ = d < degree;
            for (Eigen::Index r = 0; r < P; ++r)
                for (Eigen::Index c = 0; c < P; ++c) normal_[static_cast<std::size_t>(r) * kP + static_cast<std::size_t>(c)] = g(r, c);
            return;
        }
    }
}

PolyFit PolyRegression::fit(std::span<const double> target) const {
    const std::size_t n = state_.size();
    if (target.size() != n) throw ValidationError("regression: target size mismatch");
    const auto P = static_cast<Eigen::Index>(degree_ + 1);
    const int deg = degree_;

    PolyFit out;
    out.center = center_;
    out.scale = scale_;
    out.degree = deg;
    out.samples = n;

    // Constants are reproduced exactly, not up to summation round-off.
    bool constant = true;
    for (std::size_t i = 1; i < n && constant; ++i) constant = target[i] == target[0];
    if (constant) {
        out.coef[0] = target[0];
        return out;
    }

    const auto rhs_sums = ordered_block_sum<kP>(n, exec_, [&](std::size_t i, std::array<double, kP>& acc) {
        const double u = (state_[i] - center_) / scale_;
        double p = target[i];
        for (int d = 0; d <= deg; ++d) {
            acc[static_cast<std::size_t>(d)] += p;
            p *= u;
        }
    });

    Mat g(P, P);
    Vec rhs(P);
    for (Eigen::Index r = 0; r < P; ++r) {
        rhs(r) = rhs_sums[static_cast<std::size_t>(r)] / static_cast<double>(n);
        for (Eigen::Index c = 0; c < P; ++c) g(r, c) = normal_[static_cast<std::size_t>(r) * kP + static_cast<std::size_t>(c)];
    }
    const Vec beta = g.ldlt().solve(rhs);
    if (!beta.allFinite()) throw NumericalError("regression: non-finite coefficients");

    for (Eigen::Index r = 0; r < P; ++r) out.coef[static_cast<std::size_t>(r)] = beta(r);

    const auto res = ordered_block_sum<1>(n, exec_, [&](std::size_t i, std::array<double, 1>& acc) {
        const double e = target[i] - out(state_[i]);
        acc[0] += e * e;
    });
    const double dof = static_cast<double>(n) - static_cast<double>(P);
    out.residual_variance = dof > 0.0 ? res[0] / dof : 0.0;
    if (!std::isfinite(out.residual_variance)) throw NumericalError("regression: non-finite residuals");
    return out;
}

} // namespace teugels
