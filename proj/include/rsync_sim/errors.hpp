#pragma once

#include <stdexcept>
#include <string>

namespace rsync_sim {

/// Base class for all errors raised by this library.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The motion is constant (all amplitudes zero or zero frequency); it has no period.
struct NoMotionError : SimError {
    NoMotionError() : SimError("motion is constant: period undefined") {}
};

/// Sensor frame rate does not satisfy the sampling constraint for the observed motion.
struct NyquistError : SimError {
    using SimError::SimError;
};

/// Observation too short (or empty) to support estimation.
struct NoSamplesError : SimError {
    using SimError::SimError;
};

struct IoError : SimError {
    using SimError::SimError;
};

/// A data file row failed to parse; carries the 1-based row number.
struct MalformedRowError : SimError {
    MalformedRowError(std::size_t row, const std::string& what)
        : SimError("row " + std::to_string(row) + ": " + what), row(row) {}
    std::size_t row;
};

/// Operation requires a non-flat sinusoid fit.
struct FlatFitError : SimError {
    FlatFitError() : SimError("fit is flat: no oscillation to schedule against") {}
};

/// Every axis of a multi-axis fit is flat.
struct AllFlatError : SimError {
    AllFlatError() : SimError("all axes are flat") {}
};

/// Nonlinear refinement failed to converge within the iteration budget.
struct NonConvergenceError : SimError {
    using SimError::SimError;
};

struct EmptyTargetsError : SimError {
    EmptyTargetsError() : SimError("target list is empty") {}
};

/// Planner requires per-axis fits that were not supplied.
struct NoFitError : SimError {
    using SimError::SimError;
};

struct ZeroDurationError : SimError {
    ZeroDurationError() : SimError("report has zero duration") {}
};

/// Configuration failed validation; message includes the offending field path.
struct ConfigError : SimError {
    using SimError::SimError;
};

}  // namespace rsync_sim
