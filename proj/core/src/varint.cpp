#include "mcquic/varint.hpp"

#include <cassert>

namespace mcquic {

size_t varint_length(uint64_t v) {
  if (v < 0x40) return 1;
  if (v < 0x4000) return 2;
  if (v < 0x40000000) return 4;
  return 8;
}

std::optional<Bytes> encode_varint(uint64_t v) {
  if (v > kVarintMax) return std::nullopt;
  size_t len = varint_length(v);
  Bytes out(len);
  for (size_t i = 0; i < len; ++i) {
    out[len - 1 - i] = uint8_t(v >> (8 * i));
  }
  // Two high bits of the first byte carry log2(len).
  static const uint8_t prefix[9] = {0, 0x00, 0x40, 0, 0x80, 0, 0, 0, 0xc0};
  out[0] = uint8_t(out[0] & 0x3f) | prefix[len];
  return out;
}

std::optional<VarintDecode> decode_varint(ByteSpan b) {
  if (b.empty()) return std::nullopt;
  size_t len = size_t{1} << (b[0] >> 6);
  if (b.size() < len) return std::nullopt;
  uint64_t v = b[0] & 0x3f;
  for (size_t i = 1; i < len; ++i) v = (v << 8) | b[i];
  return VarintDecode{v, len};
}

void ByteWriter::varint(uint64_t v) {
  assert(v <= kVarintMax);
  auto enc = encode_varint(v);
  raw(as_span(*enc));
}

const char* wire_error_name(WireError e) {
  switch (e) {
    case WireError::None: return "none";
    case WireError::Truncated: return "truncated";
    case WireError::UnknownType: return "unknown-type";
    case WireError::Malformed: return "malformed";
    case WireError::OutOfRange: return "out-of-range";
  }
  return "?";
}

}  // namespace mcquic
