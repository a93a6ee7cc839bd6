#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slbm {

// Error categories map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, unknown names, inconsistent setups.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a cell density becomes non-positive or non-finite.
class NumericalInstability : public Error {
 public:
  using Error::Error;
};

/// A block ended up without fluid cells and should be discarded by the caller.
class EmptyBlock : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed file contents (bad magic, truncation). Carries the byte offset.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Ghost-exchange message does not match the receiver's face registry.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace slbm
