#pragma once

#include <stdexcept>
#include <string>

namespace digitsum {

// Base for everything thrown by this library. Subtypes exist so callers and
// tests can catch a specific failure instead of string-matching messages.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- file / parse errors ---------------------------------------------------
struct IoError : Error {
    using Error::Error;
};
struct BadMagic : Error {
    using Error::Error;
};
struct TruncatedFile : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct InvalidLabel : Error {
    using Error::Error;
};
struct CountMismatch : Error {
    using Error::Error;
};

// --- dataset generation ------------------------------------------------------
struct UnsupportedGeometry : Error {
    using Error::Error;
};
struct UnevenFolds : Error {
    using Error::Error;
};
struct EmptyBucket : Error {
    using Error::Error;
};

// --- tensors / network -------------------------------------------------------
struct ShapeMismatch : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct StaleCache : Error {
    using Error::Error;
};
struct NonFiniteGradient : Error {
    using Error::Error;
};
struct IncompatibleCheckpoint : Error {
    using Error::Error;
};

// --- configuration -----------------------------------------------------------
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace digitsum
