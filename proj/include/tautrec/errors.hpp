#pragma once

#include <stdexcept>
#include <string>

namespace tautrec {

/// Rejected input (CLI exit code 2).
struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& m) : std::runtime_error(m) {}
};

/// Internal consistency failure, e.g. a non-exact edge-factor division
/// (CLI exit code 3). Signals a bug, not a user error.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace tautrec
