#pragma once

#include <stdexcept>

namespace fasthand {

// Violated precondition or type invariant (bad shapes, invalid arguments).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed, truncated, or unreadable files (weights, annotations, images).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fasthand

// The message expression is only evaluated on failure.
#define FH_REQUIRE(cond, ...)                                \
  do {                                                       \
    if (!(cond)) throw ::fasthand::ContractViolation(__VA_ARGS__); \
  } while (0)
