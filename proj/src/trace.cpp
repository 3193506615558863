// SPDX-License-Identifier: Apache-2.0
#include "sfpc/trace.hpp"

#include <array>
#include <cstring>
#include <stdexcept>

#include "sfpc/error.hpp"

namespace sfpc::trace {

namespace {

template <typename T>
void put_le(std::ofstream& out, T v) {
  std::array<char, sizeof(T)> buf;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
  out.write(buf.data(), buf.size());
}

class Cursor {
public:
  Cursor(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size())
      throw CorruptionError("trace truncated", pos_);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

} // namespace

Writer::Writer(const std::string& path, FloatKind fmt) : out_(path, std::ios::binary) {
  if (!out_) throw std::invalid_argument("cannot open trace file for writing: " + path);
  out_.write(kMagic, 4);
  put_le<std::uint8_t>(out_, kVersion);
  put_le<std::uint8_t>(out_, static_cast<std::uint8_t>(fmt));
  put_le<std::uint16_t>(out_, 0);
}

Writer::~Writer() { close(); }

void Writer::add(const Record& r) {
  if (!out_.is_open()) throw std::logic_error("trace writer already closed");
  put_le<std::uint32_t>(out_, r.epoch);
  put_le<std::uint32_t>(out_, r.batch);
  put_le<std::uint16_t>(out_, r.tensor);
  put_le<std::uint8_t>(out_, r.kind);
  put_le<std::uint8_t>(out_, r.width);
  put_le<std::uint8_t>(out_, r.flags);
  put_le<std::uint64_t>(out_, r.raw.size());
  for (std::uint32_t v : r.raw) put_le<std::uint32_t>(out_, v);
}

void Writer::close() {
  if (out_.is_open()) {
    out_.flush();
    out_.close();
  }
}

TraceFile read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open trace file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Cursor cur(bytes);

  if (bytes.size() < 8) throw CorruptionError("trace header incomplete", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw CorruptionError("bad trace magic", 0);
  cur.get<std::uint32_t>(); // magic
  const auto version = cur.get<std::uint8_t>();
  if (version != kVersion) throw CorruptionError("unsupported trace version", 4);
  const auto fmt_byte = cur.get<std::uint8_t>();
  if (fmt_byte > 1) throw CorruptionError("bad trace format byte", 5);
  const auto reserved = cur.get<std::uint16_t>();
  if (reserved != 0) throw CorruptionError("nonzero reserved trace field", 6);

  TraceFile tf;
  tf.fmt = static_cast<FloatKind>(fmt_byte);
  const std::uint32_t raw_limit =
      tf.fmt == FloatKind::BF16 ? 0xFFFFu : 0xFFFFFFFFu;
  while (!cur.at_end()) {
    Record r;
    r.epoch = cur.get<std::uint32_t>();
    r.batch = cur.get<std::uint32_t>();
    r.tensor = cur.get<std::uint16_t>();
    r.kind = cur.get<std::uint8_t>();
    if (r.kind > 1) throw CorruptionError("bad tensor kind in trace", cur.pos() - 1);
    r.width = cur.get<std::uint8_t>();
    const std::uint8_t max_width = tf.fmt == FloatKind::BF16 ? 7 : 23;
    if (r.width > max_width) throw CorruptionError("trace width exceeds format mantissa", cur.pos() - 1);
    r.flags = cur.get<std::uint8_t>();
    if (r.flags & ~kFlagSignless) throw CorruptionError("unknown trace record flags", cur.pos() - 1);
    const auto count = cur.get<std::uint64_t>();
    if (count > bytes.size()) throw CorruptionError("trace record count implausible", cur.pos() - 8);
    r.raw.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto v = cur.get<std::uint32_t>();
      if (v > raw_limit) throw CorruptionError("raw value exceeds trace format", cur.pos() - 4);
      r.raw.push_back(v);
    }
    tf.records.push_back(std::move(r));
  }
  return tf;
}

} // namespace sfpc::trace
