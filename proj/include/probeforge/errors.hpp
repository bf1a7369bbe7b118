#pragma once

#include <stdexcept>
#include <string>

namespace probeforge {

// Base class for every error the workbench raises on bad data or bad
// configuration. CLI maps these to exit code 2; anything else is a bug
// (exit 3).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/matrix dimensions do not line up.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid configuration value (unknown activation, odd head dim, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Invalid runtime input (token id out of range, empty prompt list, ...).
struct InputError : Error {
    using Error::Error;
};

// Sequence does not fit the model's context window.
struct CapacityError : Error {
    using Error::Error;
};

// Malformed checkpoint or report file.
struct FormatError : Error {
    using Error::Error;
};

// Two checkpoints/maps/profiles are not architecture-compatible.
struct CompatibilityError : Error {
    using Error::Error;
};

// Conflict-probe template is missing a placeholder or malformed.
struct TemplateError : Error {
    using Error::Error;
};

// Relative difference against a zero baseline.
struct UndefinedBaselineError : Error {
    using Error::Error;
};

// Statistics requested over too few samples.
struct InsufficientDataError : Error {
    using Error::Error;
};

// A kernel produced a non-finite value.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace probeforge
