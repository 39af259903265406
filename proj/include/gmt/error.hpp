#pragma once

#include <stdexcept>
#include <string>

namespace gmt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: unsorted grids, shape mismatches, domain violations.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A marginal variance (or covariance block) is zero, negative or too ill-conditioned to invert.
class SingularMarginal : public Error {
public:
    using Error::Error;
};

/// Consecutive transport plans do not share their common marginal.
class ChainMismatch : public Error {
public:
    using Error::Error;
};

class InvalidRate : public Error {
public:
    using Error::Error;
};

/// The requested diagnostic is only defined for finite decorrelation rates.
class UnsupportedDiagnostic : public Error {
public:
    using Error::Error;
};

class InvalidMeasure : public Error {
public:
    using Error::Error;
};

class NotPsd : public Error {
public:
    using Error::Error;
};

class InvalidSde : public Error {
public:
    using Error::Error;
};

class WitnessNotFound : public Error {
public:
    using Error::Error;
};

/// An integer search ran past its index budget. Callers that can use partial
/// results catch the derived type carrying them (see spectral.hpp).
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace gmt
