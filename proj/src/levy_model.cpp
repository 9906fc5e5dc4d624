#include "teugels/levy_model.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "teugels/errors.hpp"

namespace teugels {

namespace {

class Fnv1a {
public:
    template <typename T>
    void add(const T& value) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (unsigned char c : bytes) {
            hash_ ^= c;
            hash_ *= 0x100000001B3ull;
        }
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

// i! / rate^i without overflow in the intermediate factorial.
double scaled_factorial(int i, double rate) {
    double r = 1.0;
    for (int k = 1; k <= i; ++k) r *= static_cast<double>(k) / rate;
    return r;
}

} // namespace

JumpMeasure JumpMeasure::point_masses(std::vector<PointMass> atoms) {
    JumpMeasure nu;
    nu.kind = atoms.empty() ? JumpKind::none : JumpKind::point_masses;
    nu.atoms = std::move(atoms);
    return nu;
}

JumpMeasure JumpMeasure::two_sided_exponential(double lambda, double p, double alpha, double beta) {
    JumpMeasure nu;
    nu.kind = JumpKind::two_sided_exponential;
    nu.exponential = {lambda, p, alpha, beta};
    return nu;
}

double JumpMeasure::total_mass() const { return raw_moment(0); }

double JumpMeasure::raw_moment(int i) const {
    switch (kind) {
    case JumpKind::none:
        return 0.0;
    case JumpKind::point_masses: {
        double s = 0.0;
        for (const auto& a : atoms) s += a.intensity * std::pow(a.location, i);
        return s;
    }
    case JumpKind::two_sided_exponential: {
        const auto& e = exponential;
        const double up = e.p * scaled_factorial(i, e.alpha);
        const double down = (1.0 - e.p) * scaled_factorial(i, e.beta) * ((i % 2 == 0) ? 1.0 : -1.0);
        return e.lambda * (up + down);
    }
    }
    return 0.0;
}

double JumpMeasure::large_jump_mean() const {
    switch (kind) {
    case JumpKind::none:
        return 0.0;
    case JumpKind::point_masses: {
        double s = 0.0;
        for (const auto& a : atoms)
            if (std::abs(a.location) >= 1.0) s += a.intensity * a.location;
        return s;
    }
    case JumpKind::two_sided_exponential: {
        // int_1^inf x a e^{-a x} dx = e^{-a} (1 + 1/a)
        const auto& e = exponential;
        const double up = e.p * std::exp(-e.alpha) * (1.0 + 1.0 / e.alpha);
        const double down = (1.0 - e.p) * std::exp(-e.beta) * (1.0 + 1.0 / e.beta);
        return e.lambda * (up - down);
    }
    }
    return 0.0;
}

LevyModel::LevyModel(double b, double sigma2, JumpMeasure nu, int i_max)
    : b_(b), sigma2_(sigma2), nu_(std::move(nu)), i_max_(i_max) {
    moments_.assign(static_cast<std::size_t>(std::max(i_max_, 1)) + 1, 0.0);
    moments_[1] = b_ + nu_.large_jump_mean();
    for (int i = 2; i <= i_max_; ++i) moments_[static_cast<std::size_t>(i)] = nu_.raw_moment(i);

    Fnv1a h;
    h.add(b_);
    h.add(sigma2_);
    h.add(static_cast<int>(nu_.kind));
    h.add(i_max_);
    for (const auto& a : nu_.atoms) {
        h.add(a.location);
        h.add(a.intensity);
    }
    if (nu_.kind == JumpKind::two_sided_exponential) {
        h.add(nu_.exponential.lambda);
        h.add(nu_.exponential.p);
        h.add(nu_.exponential.alpha);
        h.add(nu_.exponential.beta);
    }
    fingerprint_ = h.value();
}

double LevyModel::moment(int i) const {
    if (i < 1 || i > i_max_) {
        std::ostringstream msg;
        msg << "moment index " << i << " outside [1, " << i_max_ << "]";
        throw ValidationError(msg.str());
    }
    const double m = moments_[static_cast<std::size_t>(i)];
    if (!std::isfinite(m)) throw NumericalError("moment m_" + std::to_string(i) + " is not finite");
    return m;
}

double LevyModel::mu_inner(int i, int j) const {
    if (i < 0 || j < 0 || i + j + 2 > i_max_) {
        std::ostringstream msg;
        msg << "<x^" << i << ", x^" << j << ">_1 needs m_" << (i + j + 2) << " but i_max = " << i_max_;
        throw ValidationError(msg.str());
    }
    const double atom = (i == 0 && j == 0) ? sigma2_ : 0.0;
    return moment(i + j + 2) + atom;
}

double LevyModel::simulated_drift_rate() const { return moments_[1] - nu_.raw_moment(1); }

std::vector<Diagnostic> validate(const LevyModel& model) {
    std::vector<Diagnostic> out;
    auto add = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };

    if (!std::isfinite(model.drift())) add("non-finite-drift", "b must be finite");
    if (!(model.sigma2() >= 0.0) || !std::isfinite(model.sigma2()))
        add("negative-variance", "sigma2 must be finite and >= 0");
    if (model.i_max() < 2) add("i-max-too-small", "i_max must be >= 2");

    const auto& nu = model.jumps();
    bool params_ok = true;
    switch (nu.kind) {
    case JumpKind::none:
        break;
    case JumpKind::point_masses:
        for (std::size_t j = 0; j < nu.atoms.size(); ++j) {
            const auto& a = nu.atoms[j];
            if (!(a.location != 0.0) || !std::isfinite(a.location) || !(a.intensity > 0.0) ||
                !std::isfinite(a.intensity)) {
                add("invalid-atom", "atom " + std::to_string(j) + " needs location != 0 and intensity > 0");
                params_ok = false;
            }
        }
        break;
    case JumpKind::two_sided_exponential: {
        const auto& e = nu.exponential;
        if (!(e.lambda > 0.0) || !(e.p >= 0.0 && e.p <= 1.0) || !(e.alpha > 0.0) || !(e.beta > 0.0)) {
            add("invalid-exponential", "two-sided exponential needs lambda > 0, p in [0,1], alpha > 0, beta > 0");
            params_ok = false;
        }
        break;
    }
    }

    const bool no_jumps = nu.kind == JumpKind::none || (nu.atoms.empty() && nu.kind == JumpKind::point_masses);
    if (model.sigma2() == 0.0 && no_jumps)
        add("degenerate-process", "sigma2 = 0 with no jumps is a deterministic drift, not a Levy driver");

    if (!params_ok || model.i_max() < 2) return out;

    if (!std::isfinite(nu.total_mass())) add("infinite-activity", "nu(R) must be finite");

    std::vector<double> m(static_cast<std::size_t>(model.i_max()) + 1, 0.0);
    bool finite = true;
    for (int i = 1; i <= model.i_max(); ++i) {
        try {
            m[static_cast<std::size_t>(i)] = model.moment(i);
        } catch (const NumericalError&) {
            add("non-finite-moment", "m_" + std::to_string(i) + " is not finite");
            finite = false;
        }
    }
    if (!finite) return out;

    for (int i = 2; i <= model.i_max(); i += 2)
        if (m[static_cast<std::size_t>(i)] < 0.0) add("negative-even-moment", "m_" + std::to_string(i) + " < 0");

    // Cauchy-Schwarz on the jump moments: m_{i+j}^2 <= m_{2i} m_{2j}.
    const int half = model.i_max() / 2;
    for (int i = 1; i <= half; ++i) {
        for (int j = i; j <= half; ++j) {
            if (i + j < 2) continue;
            const double lhs = m[static_cast<std::size_t>(i + j)] * m[static_cast<std::size_t>(i + j)];
            const double rhs = m[static_cast<std::size_t>(2 * i)] * m[static_cast<std::size_t>(2 * j)];
            if (lhs > rhs * (1.0 + 1e-12) + 1e-300)
                add("cauchy-schwarz", "m_" + std::to_string(i + j) + "^2 > m_" + std::to_string(2 * i) + " m_" +
                                          std::to_string(2 * j));
        }
    }
    return out;
}

void require_valid(const LevyModel& model) {
    const auto diags = validate(model);
    if (diags.empty()) return;
    std::ostringstream msg;
    msg << "invalid Levy model:";
    for (const auto& d : diags) msg << " [" << d.code << "] " << d.message << ";";
    throw ValidationError(msg.str());
}

} // namespace teugels
