#pragma once

#include <stdexcept>
#include <string>

namespace caustica {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the domain of an operation (point off the model, chart exceeded, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Iterative solver did not converge within its budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Problem too close to degenerate for the requested accuracy.
class IllConditionedError : public Error {
public:
    using Error::Error;
};

// Operation not defined for this surface kind.
class UnsupportedKindError : public Error {
public:
    using Error::Error;
};

// Object could not be built from its specification.
class ConstructionError : public Error {
public:
    using Error::Error;
};

// Requested parameter has no admissible solution (no bracketing root, ...).
class RangeError : public Error {
public:
    using Error::Error;
};

// Missing or tangential geometric intersection.
class GeometryError : public Error {
public:
    using Error::Error;
};

// Curve has non-positive geodesic curvature where convexity is required.
class ConvexityError : public Error {
public:
    using Error::Error;
};

// Malformed user input (curve spec, configuration key, ...).
class InputError : public Error {
public:
    using Error::Error;
};

}  // namespace caustica
