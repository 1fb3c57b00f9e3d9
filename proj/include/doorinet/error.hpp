// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace doorinet {

/// Base class for every error raised by the library. Messages name the
/// offending field, file or value.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when inputs violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised on malformed files (CSV, manifest, checkpoint, report).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace doorinet
