#pragma once

#include <stdexcept>
#include <string>

namespace liftgraph {

/// Violated precondition or malformed value (bad dimensions, infeasible
/// assignment, out-of-range parameter).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unreadable, unwritable or malformed file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver produced a non-finite iterate.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace liftgraph
