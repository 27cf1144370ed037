#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lowlight {

/// Bad shapes, bad parameters, unreadable files. Maps to CLI exit code 1.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A log/division argument left the valid domain even after stabilization.
class NumericDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Optimization produced a non-finite loss. Carries the trace up to the failure.
class DivergedError : public std::runtime_error {
public:
    DivergedError(const std::string& what, std::vector<double> trace, std::string stage = {})
        : std::runtime_error(stage.empty() ? what : stage + ": " + what),
          trace_(std::move(trace)),
          stage_(std::move(stage)) {}

    const std::vector<double>& trace() const noexcept { return trace_; }
    const std::string& stage() const noexcept { return stage_; }

private:
    std::vector<double> trace_;
    std::string stage_;
};

}  // namespace lowlight
