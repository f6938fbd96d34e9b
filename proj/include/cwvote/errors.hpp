#pragma once

#include <stdexcept>
#include <string>

namespace cwvote {

// Base class for every domain error raised by the library. Precondition
// violations on plain arguments (N = 0, NaN couplings, ...) use
// std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The separation inequality between J_h and J_l does not hold for the
// requested (b1, b2, N, constants).
class SeparationViolated : public Error {
public:
    using Error::Error;
};

// Argument lies in a region where the function is not defined (the gap
// between the high- and low-temperature branches, beta = 1, ...).
class OutOfDomain : public Error {
public:
    using Error::Error;
};

// Statistic outside the hull of Range(S^2).
class OutOfRange : public Error {
public:
    using Error::Error;
};

// Exponential bound requested for a target set that touches the mean.
class DegenerateBound : public Error {
public:
    using Error::Error;
};

class ConstantsUncalibrated : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

// Estimate is inconclusive where a conclusive one is required.
class InconclusiveEstimate : public Error {
public:
    using Error::Error;
};

} // namespace cwvote
