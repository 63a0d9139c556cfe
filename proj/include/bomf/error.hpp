#pragma once

#include <stdexcept>
#include <string>

namespace bomf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an argument violating a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An objective evaluation failed (non-finite value, trainer divergence,
/// subprocess timeout, evaluator replied ok=false).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// The subprocess evaluator violated the line protocol (malformed JSON,
/// mismatched request id).
class ProtocolError : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

/// Linear algebra or optimizer breakdown (e.g. Cholesky failure after the
/// full jitter ladder).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace bomf
