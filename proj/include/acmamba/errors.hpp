#pragma once

#include <stdexcept>
#include <string>

namespace acmamba {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Container / file errors
struct MissingFileError : Error {
    using Error::Error;
};
struct CorruptHeaderError : Error {
    using Error::Error;
};
struct SizeMismatchError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

// Scene synthesis
struct PlacementError : Error {
    using Error::Error;
};

// Segmentation
struct InvalidTargetError : Error {
    using Error::Error;
};

// Shape / length mismatches between paired inputs
struct DimMismatchError : Error {
    using Error::Error;
};

// Numerical core
struct NonPositiveDeltaError : Error {
    using Error::Error;
};
struct EmptySequenceError : Error {
    using Error::Error;
};
struct NoTapeError : Error {
    using Error::Error;
};
struct UntrainedModelError : Error {
    using Error::Error;
};

// Evaluation
struct SingleClassError : Error {
    using Error::Error;
};

// CLI / config
struct ConfigError : Error {
    using Error::Error;
};

} // namespace acmamba
