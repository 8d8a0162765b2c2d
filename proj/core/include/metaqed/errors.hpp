#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace metaqed {

/// Input outside an operation's mathematical domain (non-finite element value,
/// non-positive impedance, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A computation produced an unusable intermediate (vanishing denominator,
/// overflow) and refused to return inf/NaN.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A divergent expression evaluated at (or within guard distance of) a pole.
class SingularityError : public NumericError {
public:
    SingularityError(const std::string& what, std::string boundary)
        : NumericError(what), boundary_(std::move(boundary)) {}
    const std::string& boundary() const noexcept { return boundary_; }

private:
    std::string boundary_;
};

/// Features that should be resolvable were not resolved on the sampling grid.
class ResolutionError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Optimizer failure; carries a human-readable diagnostic trace.
class FitError : public NumericError {
public:
    FitError(const std::string& what, std::string diagnostics = {})
        : NumericError(what), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

/// Invalid configuration of a model (dimension cap exceeded, bad truncation).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Aggregated input validation failures. Every failure names a field path.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> failures)
        : std::runtime_error(join(failures)), failures_(std::move(failures)) {}
    const std::vector<std::string>& failures() const noexcept { return failures_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "validation failed:";
        for (const auto& s : items) {
            out += "\n  ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> failures_;
};

}  // namespace metaqed
