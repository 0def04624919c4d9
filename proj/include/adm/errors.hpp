#pragma once

#include <stdexcept>
#include <string>

namespace adm {

// Error taxonomy. The CLI maps these onto exit codes:
// ConfigError -> 1, DataError -> 2, NumericError -> 3.
// Programming mistakes (bad indices, shape mismatches) use std::logic_error.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct CheckpointFormatError : DataError {
    explicit CheckpointFormatError(const std::string& what) : DataError(what) {}
};

struct CheckpointVersionError : DataError {
    explicit CheckpointVersionError(const std::string& what) : DataError(what) {}
};

struct CheckpointFingerprintError : DataError {
    explicit CheckpointFingerprintError(const std::string& what) : DataError(what) {}
};

}  // namespace adm
