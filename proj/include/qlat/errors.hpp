#pragma once

#include <stdexcept>
#include <string>

namespace qlat {

/// Base for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad inputs: malformed files, out-of-range parameters, broken invariants.
/// CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical trouble: ill-conditioned matrices, degenerate normalization,
/// near-resonant denominators, integration accuracy loss. CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Problem size beyond the configured capacity guard. CLI exit code 4.
class CapacityError : public Error {
public:
    using Error::Error;
};

} // namespace qlat
