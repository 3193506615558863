// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfpc {

// Malformed or truncated encoded data. Carries the byte offset at which the
// stream stopped making sense.
class CorruptionError : public std::runtime_error {
public:
  CorruptionError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

private:
  std::size_t byte_offset_;
};

// Non-finite or otherwise degenerate numeric state (NaN loss, Inf input
// without bypass, divergence).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sfpc
