#pragma once

#include <stdexcept>
#include <string>

namespace delaystab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad mode, negative delay, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Numerical failure: the input was fine but an iteration did not settle.
class NumericalError : public Error {
public:
    using Error::Error;
};

class BoundaryRootError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CertificationMismatch : public NumericalError {
public:
    CertificationMismatch(const std::string& what, int winding, int refined)
        : NumericalError(what), winding_count(winding), refined_count(refined) {}
    int winding_count;
    int refined_count;
};

class InsufficientPeaks : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NumericalBlowUp : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InvalidStep : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class CflViolation : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DelayTooSmall : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class ShapeMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class HistoryIncomplete : public Error {
public:
    using Error::Error;
};

}  // namespace delaystab
