#pragma once

// Random frame generators for round-trip fuzzing. Kept independent of
// any encoder internals: fields are drawn straight from the type
// invariants.

#include <random>

#include "mcquic/wire.hpp"

namespace mcquic::testgen {

inline Bytes rand_bytes(std::mt19937_64& rng, size_t lo, size_t hi) {
  size_t n = lo + size_t(rng() % (hi - lo + 1));
  Bytes out(n);
  for (auto& b : out) b = uint8_t(rng());
  return out;
}

inline uint64_t rand_varint(std::mt19937_64& rng) {
  // Spread draws across all four encoded lengths.
  switch (rng() % 4) {
    case 0: return rng() % 64;
    case 1: return rng() % 16384;
    case 2: return rng() % 1073741824;
    default: return rng() % (uint64_t{1} << 62);
  }
}

inline Bytes rand_channel_id(std::mt19937_64& rng) {
  return rand_bytes(rng, 1, kMaxChannelIdLen);
}

inline PnRangeSet rand_ranges(std::mt19937_64& rng, uint64_t max_pn,
                              size_t max_ranges) {
  PnRangeSet out;
  size_t n = rng() % (max_ranges + 1);
  for (size_t i = 0; i < n; ++i) {
    uint64_t lo = rng() % (max_pn + 1);
    uint64_t hi = std::min(max_pn, lo + rng() % 16);
    out.insert_range(lo, hi);
  }
  return out;
}

inline Frame rand_frame(std::mt19937_64& rng, size_t variant) {
  switch (variant) {
    case 0:
      return PingFrame{};
    case 1: {
      AckFrame f;
      f.ranges = rand_ranges(rng, 1 << 20, 8);
      return f;
    }
    case 2: {
      StreamFrame f;
      f.stream_id = rand_varint(rng);
      f.offset = rng() % 2 ? rand_varint(rng) : 0;
      f.fin = rng() % 2;
      f.data = rand_bytes(rng, 0, 64);
      return f;
    }
    case 3: {
      SourceSymbolFrame f;
      f.ssid = rand_varint(rng);
      StreamFrame inner;
      inner.stream_id = rand_varint(rng);
      inner.offset = rng() % 2 ? rand_varint(rng) : 0;
      inner.fin = rng() % 2;
      inner.data = rand_bytes(rng, 0, 48);
      f.inner = encode_frame(Frame{inner});
      return f;
    }
    case 4: {
      RepairFrame f;
      f.first_ssid = rand_varint(rng);
      f.window_count = 1 + rng() % 200;
      f.repair_index = rng() % 54;
      f.payload = rand_bytes(rng, 2, 96);
      return f;
    }
    case 5: {
      McAnnounceFrame f;
      f.channel_id = rand_channel_id(rng);
      f.use_ipv6 = rng() % 2;
      f.source_ip = rand_bytes(rng, f.use_ipv6 ? 16 : 4, f.use_ipv6 ? 16 : 4);
      f.group_ip = rand_bytes(rng, f.use_ipv6 ? 16 : 4, f.use_ipv6 ? 16 : 4);
      f.udp_port = uint16_t(rng());
      f.exp_timer_ms = rng() % 1000000;
      f.auth_type = AuthType(rng() % 4);
      f.path_type = McPathType(rng() % 2);
      bool asym = f.auth_type == AuthType::AsymPacket ||
                  f.auth_type == AuthType::AsymStream;
      f.pub_key = asym ? rand_bytes(rng, 32, 32) : Bytes{};
      return f;
    }
    case 6: {
      McStateFrame f;
      f.channel_id = rand_channel_id(rng);
      f.action = rng() % 2;
      f.action_data = rng();
      return f;
    }
    case 7: {
      McKeyFrame f;
      f.channel_id = rand_channel_id(rng);
      f.key_secret = rand_bytes(rng, 32, 32);
      f.first_pn = rng();
      f.client_id = rng();
      return f;
    }
    case 8: {
      McNackFrame f;
      f.channel_id = rand_channel_id(rng);
      f.ranges = rand_ranges(rng, 1 << 16, 6);
      f.p_max = f.ranges.empty() ? rng() % 1000
                                 : f.ranges.max() + rng() % 64;
      f.fec_nack = rand_ranges(rng, 1 << 16, 4);
      return f;
    }
    case 9: {
      McExpireFrame f;
      f.channel_id = rand_channel_id(rng);
      f.exp_type = uint8_t(rng() % 8);
      if (f.exp_type & kExpirePn) f.pn = rng();
      if (f.exp_type & kExpireStream) f.stream_id = rng();
      if (f.exp_type & kExpireFec) f.fec_metadata = rng();
      return f;
    }
    case 10: {
      McAuthFrame f;
      f.channel_id = rand_channel_id(rng);
      f.pn = rng();
      size_t n = rng() % 50;
      uint64_t cid = 0;
      for (size_t i = 0; i < n; ++i) {
        McAuthEntry e;
        cid += 1 + rng() % 100;
        e.client_id = cid;
        for (auto& b : e.tag) b = uint8_t(rng());
        f.signatures.push_back(e);
      }
      return f;
    }
    default: {
      McAsymFrame f;
      f.signature = rand_bytes(rng, 0, 96);
      return f;
    }
  }
}

inline constexpr size_t kFrameVariants = 12;

}  // namespace mcquic::testgen
