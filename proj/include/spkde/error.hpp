#pragma once

#include <stdexcept>
#include <string>

namespace spkde {

/// Invalid caller input: bad dimensions, out-of-range parameters, malformed files.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-PSD curvature, bisection did not reach tolerance).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested operation has no implementation for this configuration
/// (kernel without a closed-form Gram entry, grid dimension above 2).
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Broken internal precondition; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace spkde
