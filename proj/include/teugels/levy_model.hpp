#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace teugels {

enum class JumpKind { none, point_masses, two_sided_exponential };

struct PointMass {
    double location = 0.0;  // c_j != 0
    double intensity = 0.0; // lambda_j > 0
};

/// nu(dx) = lambda * [p * alpha e^{-alpha x} 1{x>0} + (1-p) * beta e^{beta x} 1{x<0}] dx
struct TwoSidedExponential {
    double lambda = 1.0;
    double p = 0.5;
    double alpha = 1.0;
    double beta = 1.0;
};

/// Finite-activity Levy measure from one of the supported parametric families.
struct JumpMeasure {
    JumpKind kind = JumpKind::none;
    std::vector<PointMass> atoms;
    TwoSidedExponential exponential;

    static JumpMeasure none() { return {}; }
    static JumpMeasure point_masses(std::vector<PointMass> atoms);
    static JumpMeasure two_sided_exponential(double lambda, double p, double alpha, double beta);

    /// nu(R \ {0}).
    double total_mass() const;
    /// int x^i nu(dx), i >= 0 (i = 0 gives the total mass).
    double raw_moment(int i) const;
    /// int_{|x|>=1} x nu(dx).
    double large_jump_mean() const;
};

struct Diagnostic {
    std::string code;
    std::string message;
};

/// Square-integrable Levy process given by its triplet (b, sigma^2, nu).
///
/// Moments m_1..m_{i_max} are computed once at construction; the object is
/// immutable afterwards. Construction never throws on a degenerate triplet so
/// that `validate` can report it; operations that need a usable process call
/// `require_valid`.
class LevyModel {
public:
    LevyModel(double b, double sigma2, JumpMeasure nu, int i_max);

    double drift() const { return b_; }
    double sigma2() const { return sigma2_; }
    const JumpMeasure& jumps() const { return nu_; }
    int i_max() const { return i_max_; }

    /// m_1 = b + int_{|x|>=1} x nu(dx); m_i = int x^i nu(dx) for i >= 2.
    double moment(int i) const;

    /// <x^i, x^j>_1 = m_{i+j+2} + sigma^2 [i = 0][j = 0].
    double mu_inner(int i, int j) const;

    /// Drift used by the simulator between jumps: m_1 - int x nu(dx), so that
    /// the simulated mean per unit time is exactly m_1.
    double simulated_drift_rate() const;

    /// Stable 64-bit identity of the triplet; bases remember the model by it.
    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    double b_;
    double sigma2_;
    JumpMeasure nu_;
    int i_max_;
    std::vector<double> moments_; // index 1..i_max
    std::uint64_t fingerprint_ = 0;
};

/// Structural diagnostics; empty when the model is usable.
std::vector<Diagnostic> validate(const LevyModel& model);

/// Throws ValidationError listing every diagnostic.
void require_valid(const LevyModel& model);

/// Convenience wrappers matching the free-function vocabulary.
inline double moment(const LevyModel& model, int i) { return model.moment(i); }
inline double mu_inner(const LevyModel& model, int i, int j) { return model.mu_inner(i, j); }

/// i_max needed for a Teugels truncation K.
inline int default_i_max(int K) { return 2 * K + 2; }

} // namespace teugels
