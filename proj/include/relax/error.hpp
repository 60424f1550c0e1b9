#pragma once

#include <stdexcept>
#include <string>

namespace relax {

enum class ErrorKind {
    InvalidArgument,
    InvalidParity,
    SizeLimit,
    DimensionMismatch,
    SymmetryMismatch,
    SupportOutsideBasis,
    NonHermitian,
    EigensolverFailure,
    DegenerateStart,
    ZeroWeight,
    TargetOutOfRange,
    BetaOverflow,
    EmptyRestriction,
    TooFewPoints,
    SingularDenominator,
    Numerical,
    Config,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::InvalidParity: return "invalid-parity";
        case ErrorKind::SizeLimit: return "size-limit";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::SymmetryMismatch: return "symmetry-mismatch";
        case ErrorKind::SupportOutsideBasis: return "support-outside-basis";
        case ErrorKind::NonHermitian: return "non-hermitian";
        case ErrorKind::EigensolverFailure: return "eigensolver-failure";
        case ErrorKind::DegenerateStart: return "degenerate-start";
        case ErrorKind::ZeroWeight: return "zero-weight";
        case ErrorKind::TargetOutOfRange: return "target-out-of-range";
        case ErrorKind::BetaOverflow: return "beta-overflow";
        case ErrorKind::EmptyRestriction: return "empty-restriction";
        case ErrorKind::TooFewPoints: return "too-few-points";
        case ErrorKind::SingularDenominator: return "singular-denominator";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

/// Library error carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Config problems are user errors; everything else is a numerical/runtime failure.
    bool is_config_error() const noexcept { return kind_ == ErrorKind::Config; }

private:
    ErrorKind kind_;
};

}  // namespace relax
