#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace espace {

enum class Errc {
    sign_violation,
    coupling_mismatch,
    non_positive_scale,
    invalid_params,
    out_of_domain,
    degenerate_quartic,
    no_solution,
    constraint_infeasible,
    complex_roots,
    unsupported_mode,
    bad_resolution,
    period_mismatch,
    stability_violation,
    non_finite,
    zero_acceleration,
    insufficient_history,
    degenerate_density,
    parse_error,
    unknown_key,
    missing_section,
    io_error,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::sign_violation: return "SignViolation";
        case Errc::coupling_mismatch: return "CouplingMismatch";
        case Errc::non_positive_scale: return "NonPositiveScale";
        case Errc::invalid_params: return "InvalidParams";
        case Errc::out_of_domain: return "OutOfDomain";
        case Errc::degenerate_quartic: return "DegenerateQuartic";
        case Errc::no_solution: return "NoSolution";
        case Errc::constraint_infeasible: return "ConstraintInfeasible";
        case Errc::complex_roots: return "ComplexRoots";
        case Errc::unsupported_mode: return "UnsupportedMode";
        case Errc::bad_resolution: return "BadResolution";
        case Errc::period_mismatch: return "PeriodMismatch";
        case Errc::stability_violation: return "StabilityViolation";
        case Errc::non_finite: return "NonFinite";
        case Errc::zero_acceleration: return "ZeroAcceleration";
        case Errc::insufficient_history: return "InsufficientHistory";
        case Errc::degenerate_density: return "DegenerateDensity";
        case Errc::parse_error: return "ParseError";
        case Errc::unknown_key: return "UnknownKey";
        case Errc::missing_section: return "MissingSection";
        case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

/// Broad failure class, used by the CLI to pick an exit status.
enum class ErrorClass { config, numeric, io };

constexpr ErrorClass classify(Errc code) noexcept {
    switch (code) {
        case Errc::sign_violation:
        case Errc::coupling_mismatch:
        case Errc::non_positive_scale:
        case Errc::invalid_params:
        case Errc::parse_error:
        case Errc::unknown_key:
        case Errc::missing_section:
        case Errc::bad_resolution:
        case Errc::period_mismatch:
            return ErrorClass::config;
        case Errc::io_error:
            return ErrorClass::io;
        default:
            return ErrorClass::numeric;
    }
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace espace
