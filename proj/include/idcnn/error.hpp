#pragma once

#include <stdexcept>
#include <string>

namespace idcnn {

/// Raised when a caller violates an operation's preconditions (shape or
/// argument mismatch). Maps to CLI exit code 1 or 2 depending on origin.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for malformed or unreadable external data (images, checkpoints,
/// patch caches, directories).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}

} // namespace idcnn
