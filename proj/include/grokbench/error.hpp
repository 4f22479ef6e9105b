// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace grokbench {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid user-supplied configuration (alpha out of range, batch too small, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Input data out of its valid domain (label >= p, index out of range, bad file).
struct DataError : Error {
    using Error::Error;
};

// Broken internal contract, e.g. a cache fed to the wrong parameters.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace grokbench
