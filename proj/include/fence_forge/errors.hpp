#pragma once

#include <stdexcept>
#include <string>

namespace ff {

enum class ErrorKind {
    MalformedTower,
    InsufficientDepth,
    OrderViolation,
    NoChildren,
    DaggerMissing,
    ZeroUpper,
    DegenerateInterval,
    RatioModeRequiresZeroLower,
    ImageOutsideFiber,
    EmptyRefinement,
    MaskNotInvariant,
    InsufficientCycles,
    CylinderTooDeep,
    OrbitScanExhausted,
    PeriodicSearchExhausted,
    MTooSmall,
    PeriodChainExhausted,
    MarksMissing,
    ModeMismatch,
    BudgetExceeded,
    ParseError,
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::MalformedTower: return "MalformedTower";
        case ErrorKind::InsufficientDepth: return "InsufficientDepth";
        case ErrorKind::OrderViolation: return "OrderViolation";
        case ErrorKind::NoChildren: return "NoChildren";
        case ErrorKind::DaggerMissing: return "DaggerMissing";
        case ErrorKind::ZeroUpper: return "ZeroUpper";
        case ErrorKind::DegenerateInterval: return "DegenerateInterval";
        case ErrorKind::RatioModeRequiresZeroLower: return "RatioModeRequiresZeroLower";
        case ErrorKind::ImageOutsideFiber: return "ImageOutsideFiber";
        case ErrorKind::EmptyRefinement: return "EmptyRefinement";
        case ErrorKind::MaskNotInvariant: return "MaskNotInvariant";
        case ErrorKind::InsufficientCycles: return "InsufficientCycles";
        case ErrorKind::CylinderTooDeep: return "CylinderTooDeep";
        case ErrorKind::OrbitScanExhausted: return "OrbitScanExhausted";
        case ErrorKind::PeriodicSearchExhausted: return "PeriodicSearchExhausted";
        case ErrorKind::MTooSmall: return "MTooSmall";
        case ErrorKind::PeriodChainExhausted: return "PeriodChainExhausted";
        case ErrorKind::MarksMissing: return "MarksMissing";
        case ErrorKind::ModeMismatch: return "ModeMismatch";
        case ErrorKind::BudgetExceeded: return "BudgetExceeded";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& what)
        : std::runtime_error(std::string(kind_name(k)) + ": " + what), kind_(k) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ff
