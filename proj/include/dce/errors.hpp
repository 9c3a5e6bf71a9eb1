#pragma once

#include <stdexcept>
#include <string>

namespace dce {

/// Invalid input: violated type invariant, malformed config, unresolved grid.
/// The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
    ValidationError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Valid input that lands in a regime the requested observable does not
/// exist in (at/above parametric threshold, numerical blow-up, no steady
/// state). The CLI maps it to exit code 3.
class RegimeError : public std::runtime_error {
public:
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dce
