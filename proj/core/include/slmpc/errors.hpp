#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slmpc {

/// Plant integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double time, const std::string& what)
        : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// A Jacobian entry came out non-finite.
class LinearizationError : public std::runtime_error {
public:
    LinearizationError(std::string matrix, std::size_t column, const std::string& what)
        : std::runtime_error(what), matrix_(std::move(matrix)), column_(column) {}
    const std::string& matrix() const { return matrix_; }
    std::size_t column() const { return column_; }

private:
    std::string matrix_;
    std::size_t column_;
};

/// Structural reduction left no state on any input-to-output path.
class ReductionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Nonzero direct feedthrough while folding is disabled.
class FeedthroughError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch while assembling an MPC problem.
class AssemblyError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A solver result was consumed although the solve did not converge.
class SolverError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Run-spec parse failure. line() is 0 when the problem is not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string key, std::size_t line, const std::string& message)
        : std::runtime_error(format(key, line, message)), key_(std::move(key)), line_(line) {}
    const std::string& key() const { return key_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& key, std::size_t line, const std::string& msg)
    {
        std::string s = "parse error";
        if (line > 0) {
            s += " at line " + std::to_string(line);
        }
        if (!key.empty()) {
            s += " (key '" + key + "')";
        }
        return s + ": " + msg;
    }

    std::string key_;
    std::size_t line_;
};

}  // namespace slmpc
