#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hf {

/// Invalid sizes or parameters handed to a constructor or operation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by a linear solve or inversion that would be meaningless.
class SingularFramingError : public std::runtime_error {
 public:
  SingularFramingError(std::size_t node, double condition)
      : std::runtime_error("numerically singular matrix at node " + std::to_string(node) +
                           " (condition " + std::to_string(condition) + ")"),
        node_{node},
        condition_{condition} {}
  std::size_t node() const noexcept { return node_; }
  double condition() const noexcept { return condition_; }

 private:
  std::size_t node_;
  double condition_;
};

/// Degree integral too far from an integer to be trusted.
class CalibrationUnstable : public std::runtime_error {
 public:
  explicit CalibrationUnstable(double raw)
      : std::runtime_error("degree integral " + std::to_string(raw) + " is not near an integer"),
        raw_{raw} {}
  double raw() const noexcept { return raw_; }

 private:
  double raw_;
};

/// Parsing / I/O failures on the on-disk formats.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or directory could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hf
