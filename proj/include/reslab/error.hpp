#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reslab {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs: violated preconditions, out-of-range values, schema mismatches.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed file content. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what), line_(0) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Numerical non-convergence. Carries the last iterate so callers can inspect
// where the solver stalled.
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what) {}
    FitError(const std::string& what, std::vector<double> last_iterate)
        : Error(what), last_iterate_(std::move(last_iterate)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    std::vector<double> last_iterate_;
};

// Degenerate or unphysical geometry: collinear circle data, negative internal
// loss, resonance outside the measured window.
class GeometryError : public Error {
public:
    using Error::Error;
};

}  // namespace reslab
