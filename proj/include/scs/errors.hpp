// Error taxonomy shared across the library. Every failure surfaces as a
// subclass of scs::Error so callers can distinguish configuration mistakes
// from data problems and estimation failures.
#pragma once

#include <stdexcept>
#include <string>

namespace scs {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument to an operation (bad fraction, tau <= 0, unknown group, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// A named column is missing or the file layout does not match the schema.
struct SchemaError : Error {
    using Error::Error;
};

// A cell failed to parse as a number; message carries the data row index.
struct ParseError : Error {
    using Error::Error;
};

// A parsed value violates a domain invariant (time <= 0, event not in {0,1}).
struct ValidationError : Error {
    using Error::Error;
};

// A model fit cannot proceed (no events, empty arm, monotone likelihood).
struct EstimationError : Error {
    using Error::Error;
};

// The optimizer produced a non-finite objective; message reports the last
// finite state it saw.
struct DivergenceError : EstimationError {
    using EstimationError::EstimationError;
};

// Bad run configuration (unknown key, dimension mismatch between model and data).
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace scs
