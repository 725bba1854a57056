#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace magarray {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Vacuum permeability, T·m/A.
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;

inline constexpr double kPpm = 1.0e6;

// Error taxonomy. The CLI maps each family onto a distinct exit status.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; the message carries file/line context.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Unresolvable reference (unknown material id, missing curve).
class ReferenceError : public Error {
public:
    using Error::Error;
};

/// Geometry invariant violation (overlap, non-orthonormal frame, ...).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Ill-conditioned system, quadrature failure and similar.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration failed to reach tolerance.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : NumericalError(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Invalid run or module configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operation called on an object in the wrong state (e.g. unsolved array).
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace magarray
