#pragma once

#include <stdexcept>
#include <string>

namespace hardycert {

enum class ErrorCode {
    InvalidArgument,
    DomainError,
    NonFiniteSample,
    Inconclusive,
    MassInfinite,
    BracketViolation,
    W1NotIntegrable,
    QOutOfRange,
    SignNotConstant,
    ConditionsViolated,
    NotDifferentiable,
    PreconditionViolated,
    RangeViolation,
    PositivityLoss,
    StabilityViolation,
    FitUnreliable,
    ConfigError,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::MassInfinite: return "MassInfinite";
    case ErrorCode::BracketViolation: return "BracketViolation";
    case ErrorCode::W1NotIntegrable: return "W1NotIntegrable";
    case ErrorCode::QOutOfRange: return "QOutOfRange";
    case ErrorCode::SignNotConstant: return "SignNotConstant";
    case ErrorCode::ConditionsViolated: return "ConditionsViolated";
    case ErrorCode::NotDifferentiable: return "NotDifferentiable";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::PositivityLoss: return "PositivityLoss";
    case ErrorCode::StabilityViolation: return "StabilityViolation";
    case ErrorCode::FitUnreliable: return "FitUnreliable";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}
    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace hardycert
