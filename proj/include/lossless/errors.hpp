#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lossless {

/// Base class for all errors raised by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A function (or interpolation data set) lies outside the domain of a chart:
/// some Stein solution P_j is not positive definite, or Q is singular.
class domain_error : public error
{
public:
    domain_error(const std::string& what, std::size_t step = 0,
                 double min_eigenvalue = 0.0)
        : error(what), step_(step), min_eigenvalue_(min_eigenvalue)
    {
    }

    /// 1-based Schur step index at which the construction stopped (0 if n/a).
    std::size_t step() const noexcept { return step_; }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    std::size_t step_;
    double min_eigenvalue_;
};

/// Singular systems, instability, or internal consistency checks that failed.
class numerical_error : public error
{
public:
    using error::error;
};

/// Malformed input files.
class parse_error : public error
{
public:
    using error::error;
};

} // namespace lossless
