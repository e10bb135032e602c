#pragma once

#include <stdexcept>
#include <string>

namespace subauction {

// Bad user-supplied data: malformed files, out-of-range parameters,
// violated input contracts. CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that exceeds what this implementation is sized
// for (too many items, too many profiles, ...). CLI exit code 2.
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// An internal numeric verification failed (LP did not converge, a certified
// bound came out negative, ...). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace subauction
