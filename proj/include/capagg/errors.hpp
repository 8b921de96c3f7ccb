#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace capagg {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed event-expression text. Carries the byte offset of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t pos)
        : Error(what + " (at position " + std::to_string(pos) + ")"), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

// Bad forecast data: out-of-range probability, empty input, missing truth,
// conflicting truths for one event, missing variable in an assignment.
class DataError : public Error {
public:
    using Error::Error;
};

// Joint support exceeds the exhaustive-enumeration cap.
class SupportCapError : public Error {
public:
    SupportCapError(std::size_t support, std::size_t cap)
        : Error("joint support of " + std::to_string(support) +
                " variables exceeds enumeration cap " + std::to_string(cap)) {}
};

// Caller misuse: unknown strategy name, dimension mismatch, bad parameters.
class UsageError : public Error {
public:
    using Error::Error;
};

// Numerical failure: a projection could not be certified, or an iterative
// scheme stopped without reaching its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

} // namespace capagg
