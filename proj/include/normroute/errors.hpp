#pragma once

#include <stdexcept>
#include <string>

namespace normroute {

// Input data violated a documented precondition or invariant.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be read or written.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke an API contract (dimension mismatch, unknown id, ...).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace normroute
