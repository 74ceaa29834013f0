#pragma once

#include <stdexcept>
#include <string>

namespace wiener {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition: bad sizes, non-finite input, unknown names.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a meaningful answer
/// (singular Gram system after jitter escalation, degenerate Krylov basis, ...).
class NumericalDegeneracy : public Error {
public:
    using Error::Error;
};

/// File could not be read, parsed or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace wiener
