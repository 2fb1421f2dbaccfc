#pragma once

#include <stdexcept>
#include <string>

namespace apdkit {

// Error classes map to CLI exit codes: input 2, precondition 3, resource 4.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violation of an internal API contract (bad arguments between modules).
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace apdkit
