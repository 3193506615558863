// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sfpc/float_format.hpp"

namespace sfpc::cli {

// Exit codes: 0 success, 1 usage or I/O failure, 2 corrupt input data,
// 3 numeric failure (non-finite values, divergence).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCorrupt = 2;
inline constexpr int kExitNumeric = 3;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

// Raw tensor files: packed little-endian values, 4 bytes each for FP32 and
// 2 for BF16. Throws invalid_argument on open failure or a size that is not
// a multiple of the value width.
std::vector<std::uint32_t> read_raw_values(const std::string& path, FloatKind kind);
void write_raw_values(const std::string& path, const std::vector<std::uint32_t>& values,
                      FloatKind kind);

// Full property suite; prints one PASS/FAIL line per invariant.
int selftest(std::ostream& out);

} // namespace sfpc::cli
