#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covshrink {

/// Base class for every numeric or model failure raised by the library.
/// The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is not symmetric positive definite. `index` is the zero-based pivot
/// (or eigenvalue) where the failure was detected.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class DecompositionError : public Error {
public:
    using Error::Error;
};

/// Two eigenvalues coincide to within the tie tolerance.
class TieError : public Error {
public:
    TieError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// A shrinkage denominator fell at or below its guard.
class ShrinkageSingularity : public Error {
public:
    ShrinkageSingularity(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Line and column are one-based; column 0 means the
/// whole line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Too many Monte Carlo replicates failed.
class ExperimentAborted : public Error {
public:
    using Error::Error;
};

}  // namespace covshrink
