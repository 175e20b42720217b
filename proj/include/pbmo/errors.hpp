#pragma once

#include <stdexcept>
#include <string>

namespace pbmo {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A requested object is finer than the working grid resolution.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// An exact enumeration would exceed the configured cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Malformed arguments: bad splits, mismatched grids, misaligned shifts.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// I/O failure while reading or writing the text/binary formats.
class IoError : public Error {
public:
    using Error::Error;
};

/// An iterative solver ran out of iterations; carries the best estimate so far.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best)
        : Error(what), best_estimate(best) {}
    double best_estimate;
};

} // namespace pbmo
