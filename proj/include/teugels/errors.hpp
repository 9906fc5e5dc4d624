#pragma once

#include <stdexcept>
#include <string>

namespace teugels {

/// Bad input: configuration, preconditions, model invariants.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The numerics broke down (non-finite values, CFL, rank loss).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Jump admissibility sum_k gamma_k * dH^(k) > -1 fails on a sampled jump.
class AdmissibilityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

} // namespace teugels
