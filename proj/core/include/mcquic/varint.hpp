#pragma once

#include <optional>
#include <utility>

#include "mcquic/bytes.hpp"

namespace mcquic {

inline constexpr uint64_t kVarintMax = (uint64_t{1} << 62) - 1;

size_t varint_length(uint64_t v);

/// Minimal-length encoding. Returns nullopt for v >= 2^62.
std::optional<Bytes> encode_varint(uint64_t v);

struct VarintDecode {
  uint64_t value = 0;
  size_t consumed = 0;
};

/// Decodes one varint from the front of `b`; accepts non-minimal
/// encodings. Returns nullopt on empty or truncated input.
std::optional<VarintDecode> decode_varint(ByteSpan b);

}  // namespace mcquic
