#pragma once

#include <stdexcept>
#include <string>

namespace islp {

/// Bad input shape or option: wrong sizes, out-of-range parameters.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function (e.g. evaluation off [0, pi]).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its target.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear system too badly conditioned to trust.
class IllPosedError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Recovered quantities disagree beyond tolerance.
class InconsistencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace islp
