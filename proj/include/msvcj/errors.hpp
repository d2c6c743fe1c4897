#pragma once

#include <stdexcept>
#include <string>

namespace msvcj {

/// Invalid user input: malformed specs, violated preconditions. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured enumeration / memory cap would be exceeded. CLI exit code 3.
class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ValidationError("<module>: <message>") when `cond` is false.
inline void require(bool cond, const char* module, const std::string& message) {
  if (!cond) throw ValidationError(std::string(module) + ": " + message);
}

}  // namespace msvcj
