#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svwa {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not conform to an operation's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Batch norm in train mode saw fewer than two samples per channel.
class DegenerateBatchError : public Error {
 public:
  using Error::Error;
};

/// A NaN/Inf appeared in an input or would appear in an output.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A class label is outside [0, num_classes).
class LabelError : public Error {
 public:
  using Error::Error;
};

/// Two parameter sets are not structurally aligned.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// A requested count exceeds what the input can supply.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary file; carries the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace svwa
