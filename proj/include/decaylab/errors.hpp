#pragma once

#include <stdexcept>
#include <string>

namespace decaylab {

/// Invalid user-facing configuration (bad mesh, inverted interval, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain where a function is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical solver produced non-finite values or failed to converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace decaylab
