#pragma once

#include <stdexcept>
#include <string>

namespace mitk {

// Thrown when a caller breaks an operation's preconditions: mismatched
// alphabets, unnormalized tables, shapes that do not chain, and so on.
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace mitk
