#pragma once

#include <stdexcept>
#include <string>

namespace metacoop {

// Contract violations (illegal actions, shape mismatches, protocol misuse).
// CLI entry points catch this and exit nonzero.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

[[noreturn]] inline void raise(const std::string& msg) { throw ContractError(msg); }

}  // namespace metacoop
