#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lobhawkes {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A malformed input line. `line()` is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Timestamps went backwards inside one session file.
class OrderingError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Invalid parameters or mismatched shapes.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Spectral radius of the kernel norm matrix is not below one.
class InstabilityError : public Error {
public:
    using Error::Error;
};

/// An iterative routine hit its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// The Wiener-Hopf system is singular or too badly conditioned to trust.
class IllConditionedError : public Error {
public:
    IllConditionedError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

} // namespace lobhawkes
