#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dcnet {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Malformed input: bad edge, nonpositive weight, size mismatch.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

/// A JSON document that parses but violates its schema or invariants.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error("schema", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// Raised by the sparse LU when no acceptable pivot exists in a column.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(std::size_t pivot, const std::string& what)
        : Error("singular_matrix", what), pivot_(pivot) {}

    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// Integration could not continue (step size underflow or nonfinite state).
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double t, std::vector<double> last_state)
        : Error("integration", what), t_(t), last_state_(std::move(last_state)) {}

    double time() const noexcept { return t_; }
    const std::vector<double>& last_state() const noexcept { return last_state_; }

private:
    double t_;
    std::vector<double> last_state_;
};

}  // namespace dcnet
