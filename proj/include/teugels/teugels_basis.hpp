#pragma once

#include <cstdint>
#include <vector>

#include "teugels/levy_model.hpp"

namespace teugels {

/// Orthonormal polynomials q_{n-1}(x) = sum_{j=1}^n a_{nj} x^{j-1} under
/// <f, g>_1 = int f g x^2 nu(dx) + sigma^2 f(0) g(0), and the jump polynomials
/// p_n(x) = x q_{n-1}(x) that define the Teugels martingales
/// H^(n) = sum_j a_{nj} Y^(j).
///
/// Polynomial indices n are 1-based (n = 1..rank) so that p_n drives H^(n).
class OrthoBasis {
public:
    OrthoBasis(std::vector<double> coefficients, int rank, std::uint64_t model_fingerprint);

    int rank() const { return rank_; }
    std::uint64_t model_fingerprint() const { return model_fingerprint_; }

    /// a_{nj}, 1 <= j <= n <= rank (zero above the diagonal).
    double a(int n, int j) const;

    /// Row-major rank x rank lower-triangular coefficient matrix.
    const std::vector<double>& coefficients() const { return coefficients_; }

    double eval_q(int n, double x) const;
    double eval_p(int n, double x) const;

    /// All p_1(x)..p_rank(x) at once.
    void eval_p_all(double x, double* out) const;

private:
    void check_index(int n) const;

    std::vector<double> coefficients_;
    int rank_;
    std::uint64_t model_fingerprint_;
};

/// Rank-detecting Cholesky of the monomial Gram matrix, in long double.
///
/// A pivot below 1e-10 * max_i G_ii ends the factorization; the returned rank
/// is min(K_requested, numerical rank of G). Throws NumericalError when a
/// pivot is negative beyond that tolerance (inconsistent moments).
OrthoBasis build_basis(const LevyModel& model, int K_requested);

/// Monomial Gram matrix G_ij = <x^i, x^j>_1, i, j = 0..K-1, row-major.
std::vector<double> gram_matrix(const LevyModel& model, int K);

/// max |(A G A^T - I)_ij|.
double verify_orthonormal(const OrthoBasis& basis, const LevyModel& model);

inline constexpr double kRankTolerance = 1e-10;

} // namespace teugels
