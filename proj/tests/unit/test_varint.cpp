#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mcquic/varint.hpp"

using namespace mcquic;

namespace {

// Independent decoder applying the 2-bit length-prefix rule bit by
// bit; the oracle the library encoding is checked against.
struct OracleDecode {
  uint64_t value;
  size_t len;
};

std::optional<OracleDecode> oracle_decode(const Bytes& b) {
  if (b.empty()) return std::nullopt;
  int two_msb = b[0] >> 6;
  size_t len = 1;
  for (int i = 0; i < two_msb; ++i) len *= 2;
  if (b.size() < len) return std::nullopt;
  uint64_t v = b[0] & 0x3f;
  for (size_t i = 1; i < len; ++i) v = v * 256 + b[i];
  return OracleDecode{v, len};
}

}  // namespace

TEST_CASE("varint frozen examples") {
  CHECK(*encode_varint(37) == from_hex("25"));
  CHECK(*encode_varint(0) == from_hex("00"));
  CHECK(*encode_varint(15293) == from_hex("7bbd"));
  CHECK(oracle_decode(from_hex("25"))->value == 37);
  CHECK(oracle_decode(from_hex("7bbd"))->value == 15293);

  auto d = decode_varint(as_span(from_hex("25")));
  REQUIRE(d);
  CHECK(d->value == 37);
  CHECK(d->consumed == 1);
}

TEST_CASE("varint range error") {
  CHECK(encode_varint(kVarintMax));
  CHECK_FALSE(encode_varint(kVarintMax + 1));
  CHECK_FALSE(encode_varint(UINT64_MAX));
}

TEST_CASE("varint non-minimal encodings accepted") {
  auto d = decode_varint(as_span(from_hex("4025")));
  REQUIRE(d);
  CHECK(d->value == 37);
  CHECK(d->consumed == 2);
  d = decode_varint(as_span(from_hex("80000025")));
  REQUIRE(d);
  CHECK(d->value == 37);
  CHECK(d->consumed == 4);
}

TEST_CASE("varint decode errors") {
  CHECK_FALSE(decode_varint({}));
  CHECK_FALSE(decode_varint(as_span(from_hex("40"))));    // needs 2 bytes
  CHECK_FALSE(decode_varint(as_span(from_hex("c000"))));  // needs 8 bytes
}

TEST_CASE("varint round trip against the oracle") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20000; ++i) {
    uint64_t v;
    switch (i % 4) {
      case 0: v = rng() % 64; break;
      case 1: v = rng() % 16384; break;
      case 2: v = rng() % 1073741824; break;
      default: v = rng() % (kVarintMax + 1); break;
    }
    auto enc = encode_varint(v);
    REQUIRE(enc);
    auto oracle = oracle_decode(*enc);
    REQUIRE(oracle);
    CHECK(oracle->value == v);
    CHECK(oracle->len == enc->size());
    auto dec = decode_varint(as_span(*enc));
    REQUIRE(dec);
    CHECK(dec->value == v);
    CHECK(dec->consumed == enc->size());
    CHECK(enc->size() == varint_length(v));
  }
}

TEST_CASE("varint boundary lengths are minimal") {
  CHECK(encode_varint(63)->size() == 1);
  CHECK(encode_varint(64)->size() == 2);
  CHECK(encode_varint(16383)->size() == 2);
  CHECK(encode_varint(16384)->size() == 4);
  CHECK(encode_varint(1073741823)->size() == 4);
  CHECK(encode_varint(1073741824)->size() == 8);
}
