#pragma once

#include <stdexcept>
#include <string>

namespace habitmc {

// Input outside the mathematical domain of a formula (negative time,
// nonpositive habit or multiplier, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Inconsistent or invalid settings (grid, path counts, parameter invariants).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The budget map stopped being decreasing in alpha on the fixed bundle.
class NonMonotoneBudget : public CalibrationError {
public:
    using CalibrationError::CalibrationError;
};

// A wealth estimate is too close to its Monte Carlo noise floor for a
// sensitivity ratio to mean anything.
class UnreliableEstimate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operation invoked without the state it needs (e.g. no calibration).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace habitmc
