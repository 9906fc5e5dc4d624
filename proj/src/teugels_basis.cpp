#include "teugels/teugels_basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "teugels/errors.hpp"

namespace teugels {

OrthoBasis::OrthoBasis(std::vector<double> coefficients, int rank, std::uint64_t model_fingerprint)
    : coefficients_(std::move(coefficients)), rank_(rank), model_fingerprint_(model_fingerprint) {
    if (rank_ < 1 || coefficients_.size() != static_cast<std::size_t>(rank_ * rank_))
        throw ValidationError("OrthoBasis: coefficient matrix does not match rank");
}

void OrthoBasis::check_index(int n) const {
    if (n < 1 || n > rank_) {
        std::ostringstream msg;
        msg << "polynomial index " << n << " outside [1, " << rank_ << "]";
        throw ValidationError(msg.str());
    }
}

double OrthoBasis::a(int n, int j) const {
    check_index(n);
    if (j < 1 || j > rank_) throw ValidationError("coefficient column out of range");
    return coefficients_[static_cast<std::size_t>((n - 1) * rank_ + (j - 1))];
}

double OrthoBasis::eval_q(int n, double x) const {
    check_index(n);
    const double* row = coefficients_.data() + static_cast<std::size_t>((n - 1) * rank_);
    double acc = 0.0;
    for (int j = n - 1; j >= 0; --j) acc = acc * x + row[j];
    return acc;
}

double OrthoBasis::eval_p(int n, double x) const { return x * eval_q(n, x); }

void OrthoBasis::eval_p_all(double x, double* out) const {
    for (int n = 1; n <= rank_; ++n) {
        const double* row = coefficients_.data() + static_cast<std::size_t>((n - 1) * rank_);
        double acc = 0.0;
        for (int j = n - 1; j >= 0; --j) acc = acc * x + row[j];
        out[n - 1] = x * acc;
    }
}

std::vector<double> gram_matrix(const LevyModel& model, int K) {
    std::vector<double> g(static_cast<std::size_t>(K * K));
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) g[static_cast<std::size_t>(i * K + j)] = model.mu_inner(i, j);
    return g;
}

OrthoBasis build_basis(const LevyModel& model, int K_requested) {
    if (K_requested < 1) throw ValidationError("K_requested must be >= 1");
    require_valid(model);
    if (model.i_max() < default_i_max(K_requested)) {
        std::ostringstream msg;
        msg << "K = " << K_requested << " needs i_max >= " << default_i_max(K_requested) << ", model has "
            << model.i_max();
        throw ValidationError(msg.str());
    }

    const int K = K_requested;
    using ld = long double;
    std::vector<ld> g(static_cast<std::size_t>(K * K));
    ld max_diag = 0.0L;
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) g[static_cast<std::size_t>(i * K + j)] = static_cast<ld>(model.mu_inner(i, j));
        max_diag = std::max(max_diag, g[static_cast<std::size_t>(i * K + i)]);
    }
    const ld tol = static_cast<ld>(kRankTolerance) * max_diag;

    // G = L L^T column by column; stop at the first vanishing Schur pivot.
    std::vector<ld> L(static_cast<std::size_t>(K * K), 0.0L);
    int rank = 0;
    for (int c = 0; c < K; ++c) {
        ld pivot = g[static_cast<std::size_t>(c * K + c)];
        for (int k = 0; k < c; ++k) pivot -= L[static_cast<std::size_t>(c * K + k)] * L[static_cast<std::size_t>(c * K + k)];
        if (pivot < -tol) {
            std::ostringstream msg;
            msg << "Gram matrix is not positive semidefinite (pivot " << static_cast<double>(pivot) << " at column "
                << c << "); the moment table is inconsistent";
            throw NumericalError(msg.str());
        }
        if (pivot <= tol) break;
        const ld d = std::sqrt(pivot);
        L[static_cast<std::size_t>(c * K + c)] = d;
        for (int r = c + 1; r < K; ++r) {
            ld s = g[static_cast<std::size_t>(r * K + c)];
            for (int k = 0; k < c; ++k) s -= L[static_cast<std::size_t>(r * K + k)] * L[static_cast<std::size_t>(c * K + k)];
            L[static_cast<std::size_t>(r * K + c)] = s / d;
        }
        rank = c + 1;
    }
    if (rank == 0) throw NumericalError("internal error: Teugels basis collapsed to rank 0");

    // A = L^{-1} restricted to the leading rank x rank block (forward substitution).
    std::vector<ld> inv(static_cast<std::size_t>(rank * rank), 0.0L);
    for (int col = 0; col < rank; ++col) {
        for (int r = col; r < rank; ++r) {
            ld s = (r == col) ? 1.0L : 0.0L;
            for (int k = col; k < r; ++k) s -= L[static_cast<std::size_t>(r * K + k)] * inv[static_cast<std::size_t>(k * rank + col)];
            inv[static_cast<std::size_t>(r * rank + col)] = s / L[static_cast<std::size_t>(r * K + r)];
        }
    }
    std::vector<double> a(inv.size());
    std::transform(inv.begin(), inv.end(), a.begin(), [](ld v) { return static_cast<double>(v); });
    return OrthoBasis(std::move(a), rank, model.fingerprint());
}

double verify_orthonormal(const OrthoBasis& basis, const LevyModel& model) {
    using ld = long double;
    const int K = basis.rank();
    const auto g = gram_matrix(model, K);
    const auto& a = basis.coefficients();
    ld worst = 0.0L;
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            ld s = 0.0L;
            for (int p = 0; p <= i; ++p)
                for (int q = 0; q <= j; ++q)
                    s += static_cast<ld>(a[static_cast<std::size_t>(i * K + p)]) * static_cast<ld>(g[static_cast<std::size_t>(p * K + q)]) *
                         static_cast<ld>(a[static_cast<std::size_t>(j * K + q)]);
            worst = std::max(worst, std::abs(s - (i == j ? 1.0L : 0.0L)));
        }
    }
    return static_cast<double>(worst);
}

} // namespace teugels
