#pragma once

#include <stdexcept>
#include <string>

namespace realign {

// Precondition violated: bad index, mismatched dimensions, non-finite input.
class domain_error : public std::domain_error {
 public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Request exceeds what an exhaustive enumeration can handle.
class capacity_error : public std::length_error {
 public:
  explicit capacity_error(const std::string& what) : std::length_error(what) {}
};

}  // namespace realign
