// SPDX-License-Identifier: Apache-2.0
#include "sfpc/container.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "sfpc/error.hpp"

namespace sfpc {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
  return v;
}

std::uint64_t groups_for(std::uint64_t count, std::uint64_t group_size) {
  return count == 0 ? 0 : (count + group_size - 1) / group_size;
}

} // namespace

packer::PackConfig config_from_header(const ContainerHeader& h) {
  packer::PackConfig cfg;
  cfg.format = FloatFormat::from_kind(h.source_format);
  cfg.variant = h.variant;
  cfg.man_width = h.man_width;
  cfg.signless = (h.flags & kFlagSignless) != 0;
  cfg.nonfinite = (h.flags & kFlagNonFiniteBypass) ? NonFinitePolicy::Bypass
                                                   : NonFinitePolicy::Reject;
  cfg.bias = h.bias;
  cfg.pad_exponent = h.pad_exponent;
  return cfg;
}

Container pack_container(std::span<const std::uint32_t> raw,
                         std::span<const std::uint64_t> dims,
                         const packer::PackConfig& cfg, bool stochastic_flag) {
  if (dims.size() > static_cast<std::size_t>(kMaxDims))
    throw std::invalid_argument("pack_container: too many dims");
  if (!dims.empty()) {
    std::uint64_t product = 1;
    for (std::uint64_t d : dims) product *= d;
    if (product != raw.size())
      throw std::invalid_argument("pack_container: dims do not cover value count");
  }
  packer::PackedStreams streams = packer::pack(raw, cfg);

  Container c;
  c.header.source_format = cfg.format.kind;
  c.header.variant = cfg.variant;
  c.header.bias = static_cast<std::uint8_t>(cfg.bias);
  c.header.flags = static_cast<std::uint8_t>(
      (cfg.signless ? kFlagSignless : 0) | (stochastic_flag ? kFlagStochastic : 0) |
      (cfg.nonfinite == NonFinitePolicy::Bypass ? kFlagNonFiniteBypass : 0));
  c.header.man_width = static_cast<std::uint8_t>(cfg.man_width);
  c.header.pad_exponent = cfg.pad_exponent;
  c.header.value_count = raw.size();
  c.header.group_count = groups_for(raw.size(), cfg.group_size());
  c.header.pad_count = static_cast<std::uint32_t>(
      c.header.group_count * cfg.group_size() - raw.size());
  c.header.meta_bytes = streams.meta.size();
  c.header.data_bytes = streams.data.size();
  c.header.dims.assign(dims.begin(), dims.end());
  c.meta = std::move(streams.meta);
  c.data = std::move(streams.data);
  return c;
}

std::vector<std::uint32_t> unpack_container(const Container& c) {
  return packer::unpack(c.data, c.meta, c.header.value_count,
                        config_from_header(c.header));
}

std::vector<std::uint8_t> serialize(const Container& c) {
  const ContainerHeader& h = c.header;
  std::vector<std::uint8_t> out;
  out.reserve(kContainerPrefixBytes + 8 * h.dims.size() + c.meta.size() + c.data.size());
  out.insert(out.end(), kContainerMagic, kContainerMagic + 4);
  out.push_back(h.version);
  out.push_back(static_cast<std::uint8_t>(h.source_format));
  out.push_back(static_cast<std::uint8_t>(h.variant));
  out.push_back(h.bias);
  out.push_back(h.flags);
  out.push_back(h.man_width);
  out.push_back(static_cast<std::uint8_t>(h.dims.size()));
  out.push_back(h.pad_exponent);
  put_u64(out, h.value_count);
  put_u32(out, h.pad_count);
  put_u64(out, h.group_count);
  put_u64(out, h.meta_bytes);
  put_u64(out, h.data_bytes);
  for (std::uint64_t d : h.dims) put_u64(out, d);
  out.insert(out.end(), c.meta.begin(), c.meta.end());
  out.insert(out.end(), c.data.begin(), c.data.end());
  return out;
}

Container parse_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kContainerPrefixBytes)
    throw CorruptionError("container shorter than the fixed prefix", bytes.size());
  if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
    throw CorruptionError("bad container magic", 0);

  Container c;
  ContainerHeader& h = c.header;
  h.version = bytes[4];
  if (h.version != kContainerVersion)
    throw CorruptionError("unsupported container version", 4);
  if (bytes[5] > 1) throw CorruptionError("unknown source format", 5);
  h.source_format = static_cast<FloatKind>(bytes[5]);
  if (bytes[6] > 1) throw CorruptionError("unknown codec variant", 6);
  h.variant = static_cast<gecko::Variant>(bytes[6]);
  h.bias = bytes[7];
  h.flags = bytes[8];
  if (h.flags & ~(kFlagSignless | kFlagStochastic | kFlagNonFiniteBypass))
    throw CorruptionError("unknown flag bits", 8);
  h.man_width = bytes[9];
  std::uint8_t ndim = bytes[10];
  if (ndim > kMaxDims) throw CorruptionError("too many dims", 10);
  h.pad_exponent = bytes[11];
  h.value_count = get_u64(bytes, 12);
  h.pad_count = get_u32(bytes, 20);
  h.group_count = get_u64(bytes, 24);
  h.meta_bytes = get_u64(bytes, 32);
  h.data_bytes = get_u64(bytes, 40);

  FloatFormat fmt = FloatFormat::from_kind(h.source_format);
  if (h.man_width > fmt.mantissa_bits)
    throw CorruptionError("man_width exceeds the format mantissa", 9);

  std::size_t off = kContainerPrefixBytes;
  if (bytes.size() < off + 8ull * ndim)
    throw CorruptionError("container truncated in dims", bytes.size());
  std::uint64_t product = 1;
  for (std::uint8_t i = 0; i < ndim; ++i, off += 8) {
    h.dims.push_back(get_u64(bytes, off));
    product *= h.dims.back();
  }
  if (ndim > 0 && product != h.value_count)
    throw CorruptionError("dims do not cover value_count", kContainerPrefixBytes);

  std::uint64_t group_size =
      h.variant == gecko::Variant::DeltaBase ? gecko::kGroupSize : gecko::kFixedGroupSize;
  if (h.group_count != groups_for(h.value_count, group_size))
    throw CorruptionError("group_count inconsistent with value_count", 24);
  if (h.pad_count != h.group_count * group_size - h.value_count)
    throw CorruptionError("pad_count inconsistent with value_count", 20);

  if (bytes.size() != off + h.meta_bytes + h.data_bytes)
    throw CorruptionError("container size does not match the stream lengths",
                          bytes.size());
  c.meta.assign(bytes.begin() + off, bytes.begin() + off + h.meta_bytes);
  off += h.meta_bytes;
  c.data.assign(bytes.begin() + off, bytes.begin() + off + h.data_bytes);
  return c;
}

void write_container_file(const std::string& path, const Container& c) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  auto bytes = serialize(c);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Container read_container_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_container(bytes);
}

} // namespace sfpc
