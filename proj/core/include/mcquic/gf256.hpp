#pragma once

#include <cstdint>
#include <stdexcept>

namespace mcquic::gf256 {

// GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D),
// log/antilog tables on generator 2.
namespace detail {
struct Tables {
  uint8_t exp[512];
  uint8_t log[256];
  Tables() {
    uint16_t x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = uint8_t(x);
      log[x] = uint8_t(i);
      x <<= 1;
      if (x & 0x100) x ^= 0x11D;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    log[0] = 0;
  }
};
inline const Tables& tables() {
  static const Tables t;
  return t;
}
}  // namespace detail

inline uint8_t mul(uint8_t a, uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const auto& t = detail::tables();
  return t.exp[t.log[a] + t.log[b]];
}

inline uint8_t inv(uint8_t a) {
  if (a == 0) throw std::domain_error("gf256: inverse of zero");
  const auto& t = detail::tables();
  return t.exp[255 - t.log[a]];
}

inline uint8_t div(uint8_t a, uint8_t b) {
  if (b == 0) throw std::domain_error("gf256: division by zero");
  if (a == 0) return 0;
  const auto& t = detail::tables();
  return t.exp[t.log[a] + 255 - t.log[b]];
}

inline uint8_t add(uint8_t a, uint8_t b) { return a ^ b; }

/// out[i] ^= c * in[i] for i in [0, n)
inline void mul_add(uint8_t* out, const uint8_t* in, size_t n, uint8_t c) {
  if (c == 0) return;
  const auto& t = detail::tables();
  unsigned lc = t.log[c];
  for (size_t i = 0; i < n; ++i) {
    if (in[i]) out[i] ^= t.exp[lc + t.log[in[i]]];
  }
}

}  // namespace mcquic::gf256
