#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kpod {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* code() const noexcept { return "error"; }
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "error-dimension"; }
};

/// A row or column carries no observed information.
class DegenerateError : public Error {
public:
    DegenerateError(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }
    const char* code() const noexcept override { return "error-degenerate"; }

private:
    std::size_t index_;
};

/// The request cannot be satisfied for this input (k > n, deletion with no
/// complete column, unreachable missingness rate, ...).
class InfeasibleError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "infeasible"; }
};

/// Label or index outside its valid range.
class IndexError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "error-index"; }
};

/// Malformed input file or config.
class ParseError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "error-parse"; }
};

}  // namespace kpod
