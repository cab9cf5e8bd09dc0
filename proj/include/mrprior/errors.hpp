#pragma once

#include <stdexcept>
#include <string>

namespace mri {

// Invalid caller-supplied values: shapes, counts, unknown enum names.
struct ArgumentError : std::invalid_argument {
    explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed on-disk data (bad magic, truncated payload, dim mismatch).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or unreadable/unwritable files.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf detected where the contract promises finite values.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent configuration: missing calibration region, checkpoint mismatch.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Randomized generation failed to meet its target within bounded retries.
struct GenerationError : std::runtime_error {
    explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training diverged (NaN loss).
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

// A Langevin chain produced non-finite samples.
struct SamplingError : std::runtime_error {
    explicit SamplingError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mri
