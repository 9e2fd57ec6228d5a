// Exception hierarchy shared by all spdtan modules.
//
// The CLI maps these onto process exit codes: ArgumentError -> 2,
// ConvergenceError -> 3, IoError -> 4.

#pragma once

#include <stdexcept>
#include <string>

namespace spdtan {

/// Invalid argument or precondition violation (dimension mismatch,
/// empty input, out-of-range parameter, malformed config).
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// A matrix expected to be positive definite was not. Carries the
/// offending eigenvalue for diagnostics.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    NotPositiveDefiniteError(const std::string& what, double eigenvalue)
        : std::runtime_error(what), eigenvalue_(eigenvalue) {}

    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

/// An iterative solver exhausted its iteration budget. Carries the final
/// residual (gradient norm, max coordinate change, ...).
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// File or stream I/O failure, including format violations.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spdtan
