// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sfpc/packer.hpp"

namespace sfpc {

// On-disk container for one packed tensor. Little-endian, fixed 48-byte
// prefix, then the dims, then the metadata stream, then the data stream:
//
//   0  magic "SFPC"
//   4  version            u8  (1)
//   5  source_format      u8  (0 = fp32, 1 = bf16)
//   6  variant            u8  (0 = delta-base, 1 = fixed-bias)
//   7  bias               u8
//   8  flags              u8  (bit 0 signless, bit 1 stochastic widths
//                              upstream, bit 2 non-finite bypass)
//   9  man_width          u8
//  10  ndim               u8  (0..8; 0 means dims omitted, flat tensor)
//  11  pad_exponent       u8
//  12  value_count        u64
//  20  pad_count          u32  (group padding slots)
//  24  group_count        u64
//  32  meta_bytes         u64
//  40  data_bytes         u64
//  48  dims               u64 x ndim
//
// pad_count and group_count are derivable from value_count; they are stored
// anyway and checked on parse so header corruption is caught early.

inline constexpr char kContainerMagic[4] = {'S', 'F', 'P', 'C'};
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::size_t kContainerPrefixBytes = 48;
inline constexpr int kMaxDims = 8;

inline constexpr std::uint8_t kFlagSignless = 1u << 0;
inline constexpr std::uint8_t kFlagStochastic = 1u << 1;
inline constexpr std::uint8_t kFlagNonFiniteBypass = 1u << 2;

struct ContainerHeader {
  std::uint8_t version = kContainerVersion;
  FloatKind source_format = FloatKind::FP32;
  gecko::Variant variant = gecko::Variant::DeltaBase;
  std::uint8_t bias = gecko::kDefaultBias;
  std::uint8_t flags = 0;
  std::uint8_t man_width = 23;
  std::uint8_t pad_exponent = gecko::kDefaultPadExponent;
  std::uint64_t value_count = 0;
  std::uint32_t pad_count = 0;
  std::uint64_t group_count = 0;
  std::uint64_t meta_bytes = 0;
  std::uint64_t data_bytes = 0;
  std::vector<std::uint64_t> dims;
};

struct Container {
  ContainerHeader header;
  std::vector<std::uint8_t> meta;
  std::vector<std::uint8_t> data;
};

packer::PackConfig config_from_header(const ContainerHeader& h);

// Packs raw values and fills in a consistent header. dims may be empty; when
// present its product must equal raw.size().
Container pack_container(std::span<const std::uint32_t> raw,
                         std::span<const std::uint64_t> dims,
                         const packer::PackConfig& cfg, bool stochastic_flag = false);

std::vector<std::uint32_t> unpack_container(const Container& c);

std::vector<std::uint8_t> serialize(const Container& c);

// Parses and fully validates a serialized container; every stored field is
// required to be self-consistent. Throws CorruptionError with the offending
// byte offset.
Container parse_container(std::span<const std::uint8_t> bytes);

void write_container_file(const std::string& path, const Container& c);
Container read_container_file(const std::string& path);

} // namespace sfpc
