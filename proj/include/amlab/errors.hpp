#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace amlab {

// Error taxonomy mirrored by the CLI exit codes (see tools/amlab_main.cpp).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

// Dimension / shape disagreements between tensors, models and data.
struct ShapeError : ValidationError {
    using ValidationError::ValidationError;
};

struct IoError : Error {
    using Error::Error;
};

struct NetworkError : Error {
    using Error::Error;
};

struct RateLimitError : Error {
    double retry_after_seconds;
    explicit RateLimitError(const std::string& msg, double retry_after = 0.0)
        : Error(msg), retry_after_seconds(retry_after) {}
};

struct TrainingDivergedError : Error {
    std::size_t epoch;
    TrainingDivergedError(const std::string& msg, std::size_t at_epoch)
        : Error(msg), epoch(at_epoch) {}
};

}  // namespace amlab
