#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace feynbody {

enum class ErrorKind {
    EmptySystem,
    SpeedViolation,
    DiscontinuousPast,
    OutOfRange,
    JunctionMismatch,
    GridMismatch,
    Collision,
    NoConvergence,
    SingularPhi,
    InvalidInitial,
    InvalidConfig,
    OracleFailure,
};

constexpr std::string_view to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::EmptySystem: return "EmptySystem";
        case ErrorKind::SpeedViolation: return "SpeedViolation";
        case ErrorKind::DiscontinuousPast: return "DiscontinuousPast";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::JunctionMismatch: return "JunctionMismatch";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::Collision: return "Collision";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::SingularPhi: return "SingularPhi";
        case ErrorKind::InvalidInitial: return "InvalidInitial";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::OracleFailure: return "OracleFailure";
    }
    return "Unknown";
}

/// Every failure raised by the library. The optional fields locate the
/// failure (time, charge, partner charge, offending value) when meaningful.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Error& at(double t) {
        t_ = t;
        return *this;
    }
    Error& charge(int j) {
        charge_ = j;
        return *this;
    }
    Error& pair(int j, int k) {
        charge_ = j;
        other_ = k;
        return *this;
    }
    Error& value(double v) {
        value_ = v;
        return *this;
    }

    ErrorKind kind() const noexcept { return kind_; }
    double time() const noexcept { return t_; }
    int charge_index() const noexcept { return charge_; }
    int other_index() const noexcept { return other_; }
    double offending_value() const noexcept { return value_; }

private:
    ErrorKind kind_;
    double t_ = std::numeric_limits<double>::quiet_NaN();
    int charge_ = -1;
    int other_ = -1;
    double value_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace feynbody
