#pragma once

#include <stdexcept>
#include <string>

namespace galga {

/// Precondition violated by the caller (bad dimension, empty input, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// A request exceeds a hard size limit (e.g. 2^D vertices for D > 20).
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Base for failures of the geometric kernel.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateInput : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class DuplicatePoint : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class SingularSimplex : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class OutsideHull : public GeometryError {
public:
    using GeometryError::GeometryError;
};

/// Leave-one-out needs at least D+1 affinely independent remaining nodes.
class InsufficientNodes : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A target function rejected an input or produced a non-finite output.
class TargetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace galga
