#pragma once

#include <stdexcept>
#include <string>

namespace flatpath {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed graph data (bad vertex ids, offset lengths, zero-offset self-loops).
class GraphError : public Error {
public:
    using Error::Error;
};

/// Graph file could not be parsed; the message names the offending line or field.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration (empty mu list, bad grid, unknown lattice kind).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// No admissible period refinement exists within the search bound.
class BoundExceededError : public Error {
public:
    using Error::Error;
};

/// Consecutive loop vertices are not joined by exactly one edge.
class EdgeNotPresentError : public Error {
public:
    using Error::Error;
};

/// A matrix handed to the eigensolver failed the Hermiticity check.
class NonHermitianError : public Error {
public:
    using Error::Error;
};

/// Eigenvalue clusters around distinct potential values are not separated.
class ClusterOverlapError : public Error {
public:
    using Error::Error;
};

/// Too few usable samples for a log-log fit.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Operation requires a nearest-neighbour hypercubic lattice.
class NotHypercubicError : public Error {
public:
    using Error::Error;
};

} // namespace flatpath
