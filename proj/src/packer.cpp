// SPDX-License-Identifier: Apache-2.0
#include "sfpc/packer.hpp"

#include <array>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "sfpc/bitstream.hpp"
#include "sfpc/error.hpp"

namespace sfpc::packer {

namespace {
constexpr int kLanes = 8;
} // namespace

void PackConfig::validate() const {
  if (man_width < 0 || man_width > format.mantissa_bits)
    throw std::invalid_argument("PackConfig: man_width out of [0, m]");
  if (bias < 0 || bias > 255)
    throw std::invalid_argument("PackConfig: bias out of [0, 255]");
}

std::uint32_t reference_transform(std::uint32_t raw, const PackConfig& cfg) {
  FloatTriple t = decompose(raw, cfg.format);
  if (cfg.signless) t.sign = 0;
  t.mantissa = quantize_mantissa(t.mantissa, cfg.man_width, cfg.format);
  return recompose(t, cfg.format);
}

namespace {

std::vector<std::uint8_t> extract_exponents(std::span<const std::uint32_t> raw,
                                            const PackConfig& cfg) {
  std::vector<std::uint8_t> exps(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (cfg.format.kind == FloatKind::BF16 && (raw[i] >> 16) != 0)
      throw std::invalid_argument("pack: raw value does not fit the 16-bit layout");
    if (cfg.nonfinite == NonFinitePolicy::Reject && is_nonfinite(raw[i], cfg.format))
      throw NumericError("pack: non-finite value at index " + std::to_string(i));
    exps[i] = decompose(raw[i], cfg.format).exponent;
  }
  return exps;
}

void put_sign_magnitude(BitWriter& lane, int delta, int width) {
  std::uint32_t mag = static_cast<std::uint32_t>(std::abs(delta));
  lane.put(mag, width);
  lane.put(delta < 0 ? 1u : 0u, 1);
}

int read_delta_exponent(BitReader& lane, int base, int width) {
  std::uint32_t mag = static_cast<std::uint32_t>(lane.get(width));
  std::uint8_t sign = static_cast<std::uint8_t>(lane.get(1));
  int e = sign ? base - static_cast<int>(mag) : base + static_cast<int>(mag);
  if (e < 0 || e > 255)
    throw CorruptionError("unpack: exponent delta out of range", lane.bit_pos() / 8);
  return e;
}

} // namespace

PackedStreams pack(std::span<const std::uint32_t> raw, const PackConfig& cfg) {
  cfg.validate();
  const FloatFormat& fmt = cfg.format;
  const int m = fmt.mantissa_bits;
  std::vector<std::uint8_t> exps = extract_exponents(raw, cfg);

  std::array<BitWriter, kLanes> lanes;
  BitWriter meta;

  auto put_value = [&](BitWriter& lane, std::size_t idx) {
    std::uint8_t sign = 0;
    std::uint32_t man = 0;
    if (idx < raw.size()) {
      FloatTriple t = decompose(raw[idx], fmt);
      sign = t.sign;
      man = t.mantissa;
    }
    if (!cfg.signless) lane.put(sign, 1);
    if (cfg.man_width > 0) lane.put(man >> (m - cfg.man_width), cfg.man_width);
  };

  if (cfg.variant == gecko::Variant::DeltaBase) {
    std::size_t groups = (raw.size() + gecko::kGroupSize - 1) / gecko::kGroupSize;
    for (std::size_t g = 0; g < groups; ++g) {
      auto tile = gecko::fill_delta_group(exps, g, cfg.pad_exponent);
      gecko::DeltaPlan plan = gecko::plan_delta(tile);
      for (int r = 1; r < gecko::kGroupRows; ++r)
        meta.put(gecko::code_for_width(plan.widths[r]), gecko::kWidthCodeBits);
      for (int r = 0; r < gecko::kGroupRows; ++r) {
        for (int c = 0; c < gecko::kGroupCols; ++c) {
          BitWriter& lane = lanes[c];
          if (r == 0) {
            lane.put(tile[c], gecko::kExponentBits);
          } else if (plan.widths[r] > 0) {
            int delta = static_cast<int>(tile[r * gecko::kGroupCols + c]) -
                        static_cast<int>(plan.bases[c]);
            put_sign_magnitude(lane, delta, plan.widths[r]);
          }
          put_value(lane, g * gecko::kGroupSize + r * gecko::kGroupCols + c);
        }
      }
    }
  } else {
    std::size_t groups = (raw.size() + gecko::kFixedGroupSize - 1) / gecko::kFixedGroupSize;
    for (std::size_t g = 0; g < groups; ++g) {
      auto tile = gecko::fill_fixed_group(exps, g, cfg.pad_exponent);
      gecko::FixedPlan plan = gecko::plan_fixed(tile, cfg.bias);
      meta.put(gecko::code_for_width(plan.width), gecko::kWidthCodeBits);
      for (int i = 0; i < gecko::kFixedGroupSize; ++i) {
        BitWriter& lane = lanes[i];
        if (plan.width > 0)
          put_sign_magnitude(lane, static_cast<int>(tile[i]) - cfg.bias, plan.width);
        put_value(lane, g * gecko::kFixedGroupSize + i);
      }
    }
  }

  PackedStreams out{};
  for (const auto& lane : lanes) out.payload_bits += lane.bit_size();
  out.meta_bits = meta.bit_size();

  const int wb = cfg.word_bits();
  const std::size_t word_bytes = static_cast<std::size_t>(wb) / 8;
  for (auto& lane : lanes) lane.align_to(wb);
  const std::size_t lane_bits = lanes[0].bit_size();
  for ([[maybe_unused]] const auto& lane : lanes) assert(lane.bit_size() == lane_bits);
  const std::size_t words = lane_bits / static_cast<std::size_t>(wb);

  out.data.reserve(words * kLanes * word_bytes);
  for (std::size_t w = 0; w < words; ++w)
    for (int l = 0; l < kLanes; ++l) {
      const auto& bytes = lanes[l].bytes();
      out.data.insert(out.data.end(), bytes.begin() + w * word_bytes,
                      bytes.begin() + (w + 1) * word_bytes);
    }
  out.meta = meta.take();
  return out;
}

std::vector<std::uint32_t> unpack(std::span<const std::uint8_t> data,
                                  std::span<const std::uint8_t> meta,
                                  std::size_t count, const PackConfig& cfg) {
  cfg.validate();
  const FloatFormat& fmt = cfg.format;
  const int m = fmt.mantissa_bits;
  const int sign_bits = cfg.signless ? 0 : 1;
  const std::size_t gs = cfg.group_size();
  const std::size_t groups = count == 0 ? 0 : (count + gs - 1) / gs;
  const std::size_t codes_per_group = cfg.variant == gecko::Variant::DeltaBase ? 7 : 1;
  const std::size_t codes = groups * codes_per_group;
  const std::size_t meta_bits = codes * gecko::kWidthCodeBits;

  if (meta.size() != (meta_bits + 7) / 8)
    throw CorruptionError("unpack: metadata stream size mismatch", meta.size());
  BitReader mr(meta);
  std::vector<int> widths(codes);
  for (auto& w : widths)
    w = gecko::width_for_code(static_cast<std::uint8_t>(mr.get(gecko::kWidthCodeBits)));
  if (mr.bits_left() > 0 && mr.get(static_cast<int>(mr.bits_left())) != 0)
    throw CorruptionError("unpack: metadata padding not zero", meta.size() - 1);

  // Every lane carries the same bit count; derive it from the widths.
  std::size_t lane_bits = 0;
  if (cfg.variant == gecko::Variant::DeltaBase) {
    lane_bits += groups * gecko::kExponentBits;
    for (int w : widths) lane_bits += w > 0 ? static_cast<std::size_t>(w) + 1 : 0;
    lane_bits += groups * gecko::kGroupRows *
                 static_cast<std::size_t>(sign_bits + cfg.man_width);
  } else {
    for (int w : widths) lane_bits += w > 0 ? static_cast<std::size_t>(w) + 1 : 0;
    lane_bits += groups * static_cast<std::size_t>(sign_bits + cfg.man_width);
  }

  const int wb = cfg.word_bits();
  const std::size_t word_bytes = static_cast<std::size_t>(wb) / 8;
  const std::size_t words_per_lane = (lane_bits + wb - 1) / static_cast<std::size_t>(wb);
  if (data.size() != words_per_lane * kLanes * word_bytes)
    throw CorruptionError("unpack: data stream size mismatch", data.size());

  std::array<std::vector<std::uint8_t>, kLanes> lane_bytes;
  for (auto& b : lane_bytes) b.reserve(words_per_lane * word_bytes);
  for (std::size_t w = 0; w < words_per_lane; ++w)
    for (int l = 0; l < kLanes; ++l) {
      std::size_t off = (w * kLanes + l) * word_bytes;
      lane_bytes[l].insert(lane_bytes[l].end(), data.begin() + off,
                           data.begin() + off + word_bytes);
    }
  std::vector<BitReader> lanes;
  lanes.reserve(kLanes);
  for (int l = 0; l < kLanes; ++l) lanes.emplace_back(lane_bytes[l]);

  std::vector<std::uint32_t> out;
  out.reserve(count);
  auto read_value = [&](BitReader& lane, int exponent) -> std::uint32_t {
    std::uint8_t sign = cfg.signless ? 0 : static_cast<std::uint8_t>(lane.get(1));
    std::uint32_t man = 0;
    if (cfg.man_width > 0)
      man = static_cast<std::uint32_t>(lane.get(cfg.man_width)) << (m - cfg.man_width);
    return recompose({sign, static_cast<std::uint8_t>(exponent), man}, fmt);
  };

  if (cfg.variant == gecko::Variant::DeltaBase) {
    for (std::size_t g = 0; g < groups; ++g) {
      std::array<int, gecko::kGroupCols> bases{};
      for (int r = 0; r < gecko::kGroupRows; ++r) {
        int w = r == 0 ? 0 : widths[g * 7 + r - 1];
        for (int c = 0; c < gecko::kGroupCols; ++c) {
          BitReader& lane = lanes[c];
          int e;
          if (r == 0) {
            e = static_cast<int>(lane.get(gecko::kExponentBits));
            bases[c] = e;
          } else {
            e = w > 0 ? read_delta_exponent(lane, bases[c], w) : bases[c];
          }
          std::uint32_t v = read_value(lane, e);
          std::size_t idx = g * gecko::kGroupSize + r * gecko::kGroupCols + c;
          if (idx < count) out.push_back(v);
        }
      }
    }
  } else {
    for (std::size_t g = 0; g < groups; ++g) {
      int w = widths[g];
      for (int i = 0; i < gecko::kFixedGroupSize; ++i) {
        BitReader& lane = lanes[i];
        int e = w > 0 ? read_delta_exponent(lane, cfg.bias, w) : cfg.bias;
        std::uint32_t v = read_value(lane, e);
        if (g * gecko::kFixedGroupSize + i < count) out.push_back(v);
      }
    }
  }

  for (int l = 0; l < kLanes; ++l) {
    if (lanes[l].bit_pos() != lane_bits)
      throw CorruptionError("unpack: lane consumed unexpected bit count",
                            lanes[l].bit_pos() / 8);
    std::size_t left = lanes[l].bits_left();
    if (left > 0 && lanes[l].get(static_cast<int>(left)) != 0)
      throw CorruptionError("unpack: lane flush padding not zero", lane_bits / 8);
  }
  return out;
}

double Footprint::ratio() const {
  if (original_bits == 0)
    throw std::invalid_argument("Footprint::ratio: no original bits");
  return static_cast<double>(total_bits()) / static_cast<double>(original_bits);
}

Footprint measure(std::span<const std::uint32_t> raw, const PackConfig& cfg) {
  cfg.validate();
  Footprint f{};
  f.original_bits = raw.size() * static_cast<std::size_t>(cfg.format.total_bits());

  std::vector<std::uint8_t> exps(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    exps[i] = decompose(raw[i], cfg.format).exponent;

  std::size_t slots = 0;
  if (cfg.variant == gecko::Variant::DeltaBase) {
    std::size_t groups = (raw.size() + gecko::kGroupSize - 1) / gecko::kGroupSize;
    for (std::size_t g = 0; g < groups; ++g) {
      gecko::DeltaPlan plan =
          gecko::plan_delta(gecko::fill_delta_group(exps, g, cfg.pad_exponent));
      f.exponent_bits += gecko::kGroupCols * gecko::kExponentBits + plan.payload_bits;
      f.meta_bits += (gecko::kGroupRows - 1) * gecko::kWidthCodeBits;
    }
    slots = groups * gecko::kGroupSize;
  } else {
    std::size_t groups = (raw.size() + gecko::kFixedGroupSize - 1) / gecko::kFixedGroupSize;
    for (std::size_t g = 0; g < groups; ++g) {
      gecko::FixedPlan plan =
          gecko::plan_fixed(gecko::fill_fixed_group(exps, g, cfg.pad_exponent), cfg.bias);
      f.exponent_bits += plan.total_bits - gecko::kWidthCodeBits;
      f.meta_bits += gecko::kWidthCodeBits;
    }
    slots = groups * gecko::kFixedGroupSize;
  }
  f.sign_bits = cfg.signless ? 0 : slots;
  f.mantissa_bits = slots * static_cast<std::size_t>(cfg.man_width);
  return f;
}

} // namespace sfpc::packer
