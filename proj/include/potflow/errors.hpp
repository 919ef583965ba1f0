#pragma once

#include <stdexcept>
#include <string>

namespace potflow {

/// Argument outside the domain of a state function.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Request for the subsonic branch, which is never served.
struct BranchError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Quadrature, root-finding or marching failure.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Turning variable at or beyond the vacuum budget.
struct VacuumBudgetExceeded : std::domain_error {
    using std::domain_error::domain_error;
};

/// Malformed geometry or inlet data (NaN, non-monotone samples, ...).
struct DataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Reconstructed fields that contradict the coordinate transform.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration text or key.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace potflow
