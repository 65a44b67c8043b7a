#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace fredholm {

/// Base class for every error raised by the library. Carries a short machine
/// readable code and numeric detail fields that the CLI forwards verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message,
          std::map<std::string, double> detail = {})
        : std::runtime_error(message), code_(std::move(code)), detail_(std::move(detail)) {}

    const std::string& code() const noexcept { return code_; }
    const std::map<std::string, double>& detail() const noexcept { return detail_; }

private:
    std::string code_;
    std::map<std::string, double> detail_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& message, std::map<std::string, double> detail = {})
        : Error("domain_error", message, std::move(detail)) {}
};

/// Malformed kernel, problem or configuration.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message, std::map<std::string, double> detail = {})
        : Error("invalid_argument", message, std::move(detail)) {}
};

/// The discretized quadratic form is not positive definite.
class NotPositiveType : public Error {
public:
    NotPositiveType(long pivot_index, double pivot_value, double threshold)
        : Error("not_positive_type", "kernel not of positive type at this resolution",
                {{"pivot_index", static_cast<double>(pivot_index)},
                 {"pivot_value", pivot_value},
                 {"threshold", threshold}}) {}
};

/// A small dense system that should be nonsingular came out numerically singular.
class IllConditioned : public Error {
public:
    IllConditioned(const std::string& message, double rcond)
        : Error("ill_conditioned", message, {{"rcond", rcond}}) {}
};

}  // namespace fredholm
