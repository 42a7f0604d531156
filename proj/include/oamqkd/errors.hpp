#pragma once

#include <stdexcept>
#include <string>

namespace oamqkd {

// Parameter or state failed a precondition (bad normalization, bad fractions, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A decoy bound cannot be evaluated (e.g. zero single-photon gain lower bound).
class BoundUndefinedError : public DomainError {
public:
    using DomainError::DomainError;
};

// Observables cannot be estimated from a session (a needed class was never sent).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Centroid or wander statistics requested on degenerate input.
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No sign change of the key rate inside the gain bracket.
class ThresholdUndefinedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace oamqkd
