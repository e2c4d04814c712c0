#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace airseries {

/// Failure categories shared by every module. The CLI maps these onto exit codes.
enum class ErrorKind {
    InsufficientData,
    MissingData,
    Arity,
    SplitBounds,
    Schema,
    EmptySelection,
    UndefinedCorrelation,
    Misaligned,
    LagBounds,
    NumericalDegeneracy,
    DegenerateInput,
    DegreesOfFreedom,
    ParameterBounds,
    Convergence,
    Validity,
    PercentageUndefined,
    SmallSampleDof,
    Config,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::MissingData: return "missing-data";
    case ErrorKind::Arity: return "arity";
    case ErrorKind::SplitBounds: return "split-bounds";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::EmptySelection: return "empty-selection";
    case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
    case ErrorKind::Misaligned: return "misaligned";
    case ErrorKind::LagBounds: return "lag-bounds";
    case ErrorKind::NumericalDegeneracy: return "numerical-degeneracy";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::DegreesOfFreedom: return "dof";
    case ErrorKind::ParameterBounds: return "parameter-bounds";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Validity: return "validity";
    case ErrorKind::PercentageUndefined: return "percentage-undefined";
    case ErrorKind::SmallSampleDof: return "small-sample-dof";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when an optimizer exhausts its evaluation budget. Carries the best point seen.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, std::vector<double> best_point, double best_value)
        : Error(ErrorKind::Convergence, message),
          best_point_(std::move(best_point)),
          best_value_(best_value) {}

    const std::vector<double>& best_point() const noexcept { return best_point_; }
    double best_value() const noexcept { return best_value_; }

private:
    std::vector<double> best_point_;
    double best_value_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace airseries
