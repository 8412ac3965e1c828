#pragma once

#include <stdexcept>
#include <string>

namespace opasym {

/// Base class for every failure raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid input document. Carries the offending field path.
class config_error : public error {
public:
    config_error(std::string field, const std::string& what)
        : error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Iterations that failed to converge, lost positivity, or hit a singular point.
class numerical_error : public error {
public:
    using error::error;
};

/// The requested ansatz does not describe the model (wrong number of cuts,
/// negative density, regime mismatch).
class model_mismatch : public error {
public:
    using error::error;
};

} // namespace opasym
