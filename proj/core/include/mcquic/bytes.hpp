#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace mcquic {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

inline ByteSpan as_span(const Bytes& b) {
  return ByteSpan{b.data(), b.size()};
}

inline Bytes to_bytes(ByteSpan s) {
  return Bytes(s.begin(), s.end());
}

inline Bytes from_hex(const std::string& hex);
inline std::string to_hex(ByteSpan b);

enum class WireError {
  None,
  Truncated,       // buffer ended before a complete field
  UnknownType,     // unassigned frame-type code
  Malformed,       // field violates an invariant (range order, length bound, ...)
  OutOfRange,      // value cannot be represented (varint >= 2^62)
};

const char* wire_error_name(WireError e);

/// Cursor over an immutable byte buffer. Reads past the end latch the
/// error state; all subsequent reads return zeros and consume nothing.
class ByteReader {
 public:
  explicit ByteReader(ByteSpan buf) : buf_(buf) {}

  bool ok() const { return err_ == WireError::None; }
  WireError error() const { return err_; }
  size_t pos() const { return pos_; }
  size_t remaining() const { return ok() ? buf_.size() - pos_ : 0; }

  void fail(WireError e) {
    if (err_ == WireError::None) err_ = e;
  }

  uint8_t u8() {
    if (!ensure(1)) return 0;
    return buf_[pos_++];
  }

  uint16_t u16be() {
    if (!ensure(2)) return 0;
    uint16_t v = (uint16_t(buf_[pos_]) << 8) | buf_[pos_ + 1];
    pos_ += 2;
    return v;
  }

  uint64_t u64be() {
    if (!ensure(8)) return 0;
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | buf_[pos_ + i];
    pos_ += 8;
    return v;
  }

  // QUIC-style variable-length integer; accepts non-minimal encodings.
  uint64_t varint() {
    if (!ensure(1)) return 0;
    uint8_t first = buf_[pos_];
    size_t len = size_t{1} << (first >> 6);
    if (!ensure(len)) return 0;
    uint64_t v = first & 0x3f;
    for (size_t i = 1; i < len; ++i) v = (v << 8) | buf_[pos_ + i];
    pos_ += len;
    return v;
  }

  Bytes bytes(size_t n) {
    if (!ensure(n)) return {};
    Bytes out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }

  ByteSpan view(size_t n) {
    if (!ensure(n)) return {};
    ByteSpan out = buf_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  bool ensure(size_t n) {
    if (!ok()) return false;
    if (buf_.size() - pos_ < n) {
      err_ = WireError::Truncated;
      return false;
    }
    return true;
  }

  ByteSpan buf_;
  size_t pos_ = 0;
  WireError err_ = WireError::None;
};

/// Appends big-endian fields to a growing buffer.
class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }

  void u16be(uint16_t v) {
    out_.push_back(uint8_t(v >> 8));
    out_.push_back(uint8_t(v));
  }

  void u64be(uint64_t v) {
    for (int i = 7; i >= 0; --i) out_.push_back(uint8_t(v >> (8 * i)));
  }

  // Minimal-length QUIC varint; caller guarantees v < 2^62.
  void varint(uint64_t v);

  void raw(ByteSpan b) { out_.insert(out_.end(), b.begin(), b.end()); }

  size_t size() const { return out_.size(); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

inline Bytes from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  int hi = -1;
  for (char c : hex) {
    int n = nibble(c);
    if (n < 0) continue;  // permit whitespace separators
    if (hi < 0) {
      hi = n;
    } else {
      out.push_back(uint8_t(hi << 4 | n));
      hi = -1;
    }
  }
  return out;
}

inline std::string to_hex(ByteSpan b) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (uint8_t v : b) {
    out.push_back(digits[v >> 4]);
    out.push_back(digits[v & 0xf]);
  }
  return out;
}

}  // namespace mcquic
