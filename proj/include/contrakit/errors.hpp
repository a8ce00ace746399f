#pragma once

// =============================================================================
// contrakit - Error Types
// =============================================================================
// Exception hierarchy shared by all modules. The CLI maps these onto its
// stable exit-code contract:
//   0 success / contracting verdict
//   1 not-contracting verdict (not an exception)
//   2 rejected input (InputError, ParseError)
//   3 runtime divergence (DivergenceError)
// =============================================================================

#include <stdexcept>
#include <string>

namespace contrakit {

/// Base class for all contrakit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated precondition or malformed user input (CLI exit code 2).
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

/// Numerical blow-up during integration (CLI exit code 3).
/// Carries the last time at which the state was still finite.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, double last_valid_time)
        : Error(msg), last_valid_time_(last_valid_time) {}

    [[nodiscard]] double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_ = 0.0;
};

/// A requested bound or certificate exists but its premises fail
/// (e.g. a non-contracting rate where a positive one is required).
class NotApplicableError : public Error {
public:
    explicit NotApplicableError(const std::string& msg) : Error(msg) {}
};

/// Domain error raised while evaluating an expression (division by zero,
/// even root of a negative, non-finite intermediate), tagged with the
/// position of the offending node (1-based).
class EvalError : public Error {
public:
    EvalError(const std::string& msg, int line, int column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int line_ = 0;
    int column_ = 0;
};

/// System-definition file error with an exact source position (1-based).
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, int line, int column)
        : InputError(format(msg, line, column)), line_(line), column_(column) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        return std::to_string(line) + ":" + std::to_string(column) + ": " + msg;
    }

    int line_ = 0;
    int column_ = 0;
};

} // namespace contrakit
