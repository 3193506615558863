// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sfpc/float_format.hpp"

namespace sfpc::trace {

// Binary tensor trace: the raw storage patterns of selected training batches
// plus the mantissa width each tensor was granted. Replaying a trace must
// reproduce the exact footprint the run reported.
//
// Layout (little-endian): magic "SFPT", version u8, format u8, reserved u16,
// then records until end of file. Record: epoch u32, batch u32, tensor u16,
// kind u8 (0 weights, 1 activations), width u8, flags u8 (bit 0: stored
// without sign bits), count u64, count x u32 raw.

inline constexpr char kMagic[4] = {'S', 'F', 'P', 'T'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::uint8_t kFlagSignless = 1;

struct Record {
  std::uint32_t epoch = 0;
  std::uint32_t batch = 0;
  std::uint16_t tensor = 0;
  std::uint8_t kind = 0;
  std::uint8_t width = 0;
  std::uint8_t flags = 0;
  std::vector<std::uint32_t> raw;
};

class Writer {
public:
  Writer(const std::string& path, FloatKind fmt);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void add(const Record& r);
  void close();

private:
  std::ofstream out_;
};

struct TraceFile {
  FloatKind fmt = FloatKind::FP32;
  std::vector<Record> records;
};

// Throws CorruptionError on malformed or truncated input.
TraceFile read_trace(const std::string& path);

} // namespace sfpc::trace
