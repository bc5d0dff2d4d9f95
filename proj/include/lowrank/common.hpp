#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lowrank {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad range, mismatched dims).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configured resource budget (memory, enumeration size) would be exceeded.
class GuardViolation : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to produce a usable result.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

enum class NormTag { frobenius, nuclear };

enum class Decision { accept, reject };

std::string_view to_string(NormTag tag);
std::string_view to_string(Decision decision);
NormTag parse_norm_tag(std::string_view text);

}  // namespace lowrank
