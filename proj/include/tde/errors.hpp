#pragma once

#include <stdexcept>
#include <string>

namespace tde {

// Failure taxonomy shared by every module. Operations throw instead of
// returning sentinel values; the CLI maps categories to exit codes.
enum class errc {
    not_symbolic,
    resource_limit,
    insufficient_window,
    bad_window,
    mixed_systems,
    aperiodicity_required,
    invariant_violation,
    dimension_too_small,
    retries_exhausted,
    modulus_violated,
    order_too_large,
    verification_failed,
    widim_gate_failed,
    not_in_base,
    bad_epsilon,
    unsupported,
    unsupported_dimension,
    length_mismatch,
    config_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::not_symbolic: return "NotSymbolic";
        case errc::resource_limit: return "ResourceLimit";
        case errc::insufficient_window: return "InsufficientWindow";
        case errc::bad_window: return "BadWindow";
        case errc::mixed_systems: return "MixedSystems";
        case errc::aperiodicity_required: return "AperiodicityRequired";
        case errc::invariant_violation: return "InvariantViolation";
        case errc::dimension_too_small: return "DimensionTooSmall";
        case errc::retries_exhausted: return "RetriesExhausted";
        case errc::modulus_violated: return "ModulusViolated";
        case errc::order_too_large: return "OrderTooLarge";
        case errc::verification_failed: return "VerificationFailed";
        case errc::widim_gate_failed: return "WidimGateFailed";
        case errc::not_in_base: return "NotInBase";
        case errc::bad_epsilon: return "BadEpsilon";
        case errc::unsupported: return "Unsupported";
        case errc::unsupported_dimension: return "UnsupportedDimension";
        case errc::length_mismatch: return "LengthMismatch";
        case errc::config_error: return "ConfigError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace tde
