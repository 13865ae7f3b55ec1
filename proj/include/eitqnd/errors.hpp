// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace eitqnd {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad physical parameter or argument (negative rate, zero divisor, unknown label...).
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// Operator/state dimensions do not match the space they claim to live on.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Fock truncation too small for the requested state.
class CutoffError : public Error {
public:
    using Error::Error;
};

/// Liouvillian null space is not one-dimensional beyond the trace deficiency.
class DegenerateSteadyStateError : public Error {
public:
    using Error::Error;
};

/// Adaptive integrator step size underflowed.
class StiffnessError : public Error {
public:
    using Error::Error;
};

/// A numerical invariant (trace, hermiticity, positivity) broke beyond its slack.
class NumericalFailureError : public Error {
public:
    using Error::Error;
};

/// Trajectory step too coarse: single-step jump probability exceeded the guard.
class StepSizeError : public Error {
public:
    using Error::Error;
};

/// Calibration table is unusable (non-monotone S(n): ambiguous QND readout).
class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Config file rejected; carries line/column diagnostics in the message.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace eitqnd
