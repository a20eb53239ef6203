#include "mcquic/wire.hpp"

#include <algorithm>

namespace mcquic {

void PnRangeSet::insert_range(uint64_t lo, uint64_t hi) {
  // PNs are varint-bounded (< 2^62), so the +1 arithmetic cannot wrap.
  if (lo > hi) return;
  std::vector<PnRange> out;
  out.reserve(ranges_.size() + 1);
  PnRange cur{lo, hi};
  size_t i = 0;
  // Ranges strictly below cur and not adjacent to it.
  while (i < ranges_.size() && ranges_[i].hi + 1 < cur.lo) {
    out.push_back(ranges_[i++]);
  }
  // Merge everything overlapping or adjacent.
  while (i < ranges_.size() && ranges_[i].lo <= cur.hi + 1) {
    cur.lo = std::min(cur.lo, ranges_[i].lo);
    cur.hi = std::max(cur.hi, ranges_[i].hi);
    ++i;
  }
  out.push_back(cur);
  while (i < ranges_.size()) out.push_back(ranges_[i++]);
  ranges_ = std::move(out);
}

bool PnRangeSet::contains(uint64_t pn) const {
  auto it = std::upper_bound(
      ranges_.begin(), ranges_.end(), pn,
      [](uint64_t v, const PnRange& r) { return v < r.lo; });
  if (it == ranges_.begin()) return false;
  --it;
  return pn >= it->lo && pn <= it->hi;
}

uint64_t PnRangeSet::count() const {
  uint64_t n = 0;
  for (const auto& r : ranges_) n += r.hi - r.lo + 1;
  return n;
}

void PnRangeSet::erase_up_to(uint64_t pn) {
  std::vector<PnRange> out;
  for (const auto& r : ranges_) {
    if (r.hi <= pn) continue;
    out.push_back({std::max(r.lo, pn + 1), r.hi});
  }
  ranges_ = std::move(out);
}

PnRangeSet PnRangeSet::gaps_within(uint64_t lo, uint64_t hi) const {
  PnRangeSet out;
  if (lo > hi) return out;
  uint64_t next = lo;
  for (const auto& r : ranges_) {
    if (r.hi < lo) continue;
    if (r.lo > hi) break;
    if (r.lo > next) out.insert_range(next, std::min(r.lo - 1, hi));
    next = std::max(next, r.hi + 1);
    if (next > hi) return out;
  }
  if (next <= hi) out.insert_range(next, hi);
  return out;
}

namespace {

void put_channel_id(ByteWriter& w, const Bytes& cid) {
  w.u8(uint8_t(cid.size()));
  w.raw(as_span(cid));
}

Bytes get_channel_id(ByteReader& r) {
  uint8_t len = r.u8();
  if (len == 0 || len > kMaxChannelIdLen) {
    r.fail(WireError::Malformed);
    return {};
  }
  return r.bytes(len);
}

void put_var_bytes(ByteWriter& w, const Bytes& b) {
  w.varint(b.size());
  w.raw(as_span(b));
}

Bytes get_var_bytes(ByteReader& r) {
  uint64_t len = r.varint();
  if (!r.ok()) return {};
  if (len > r.remaining()) {
    r.fail(WireError::Truncated);
    return {};
  }
  return r.bytes(size_t(len));
}

void put_ranges(ByteWriter& w, const PnRangeSet& set) {
  w.varint(set.ranges().size());
  for (const auto& r : set.ranges()) {
    w.varint(r.lo);
    w.varint(r.hi);
  }
}

PnRangeSet get_ranges(ByteReader& r) {
  PnRangeSet out;
  uint64_t n = r.varint();
  uint64_t prev_hi = 0;
  bool first = true;
  for (uint64_t i = 0; i < n && r.ok(); ++i) {
    uint64_t lo = r.varint();
    uint64_t hi = r.varint();
    // Require the canonical form: ascending, disjoint, non-adjacent.
    if (lo > hi || (!first && lo <= prev_hi + 1)) {
      r.fail(WireError::Malformed);
      return out;
    }
    out.insert_range(lo, hi);
    prev_hi = hi;
    first = false;
  }
  return out;
}

struct FrameEncoder {
  ByteWriter w;

  void operator()(const PingFrame&) { w.u8(kTypePing); }

  void operator()(const AckFrame& f) {
    w.u8(kTypeAck);
    put_ranges(w, f.ranges);
  }

  void operator()(const StreamFrame& f) {
    uint8_t type = kTypeStreamBase | 0x02;  // LEN always set on encode
    if (f.offset != 0) type |= 0x04;
    if (f.fin) type |= 0x01;
    w.u8(type);
    w.varint(f.stream_id);
    if (f.offset != 0) w.varint(f.offset);
    w.varint(f.data.size());
    w.raw(as_span(f.data));
  }

  void operator()(const SourceSymbolFrame& f) {
    w.u8(kTypeSourceSymbol);
    w.varint(f.ssid);
    w.raw(as_span(f.inner));  // inner is itself a complete frame encoding
  }

  void operator()(const RepairFrame& f) {
    w.u8(kTypeRepair);
    w.varint(f.first_ssid);
    w.varint(f.window_count);
    w.varint(f.repair_index);
    put_var_bytes(w, f.payload);
  }

  void operator()(const McAnnounceFrame& f) {
    w.u8(kTypeMcAnnounce);
    put_channel_id(w, f.channel_id);
    w.u8(f.use_ipv6 ? 1 : 0);
    w.raw(as_span(f.source_ip));
    w.raw(as_span(f.group_ip));
    w.u16be(f.udp_port);
    w.u64be(f.exp_timer_ms);
    w.u64be(uint64_t(f.auth_type));
    w.u64be(uint64_t(f.path_type));
    put_var_bytes(w, f.pub_key);
  }

  void operator()(const McStateFrame& f) {
    w.u8(kTypeMcState);
    put_channel_id(w, f.channel_id);
    w.u64be(f.action);
    w.u64be(f.action_data);
  }

  void operator()(const McKeyFrame& f) {
    w.u8(kTypeMcKey);
    put_channel_id(w, f.channel_id);
    put_var_bytes(w, f.key_secret);
    w.u64be(f.first_pn);
    w.u64be(f.client_id);
  }

  void operator()(const McNackFrame& f) {
    w.u8(kTypeMcNack);
    put_channel_id(w, f.channel_id);
    w.u64be(f.p_max);
    put_ranges(w, f.ranges);
    put_ranges(w, f.fec_nack);
  }

  void operator()(const McExpireFrame& f) {
    w.u8(kTypeMcExpire);
    put_channel_id(w, f.channel_id);
    w.u8(f.exp_type);
    if (f.exp_type & kExpirePn) w.u64be(f.pn);
    if (f.exp_type & kExpireStream) w.u64be(f.stream_id);
    if (f.exp_type & kExpireFec) w.u64be(f.fec_metadata);
  }

  void operator()(const McAuthFrame& f) {
    w.u8(kTypeMcAuth);
    put_channel_id(w, f.channel_id);
    w.u64be(f.pn);
    w.varint(f.signatures.size());
    for (const auto& e : f.signatures) {
      w.u64be(e.client_id);
      w.raw(ByteSpan{e.tag.data(), e.tag.size()});
    }
  }

  void operator()(const McAsymFrame& f) {
    w.u8(kTypeMcAsym);
    put_var_bytes(w, f.signature);
  }
};

std::optional<Frame> decode_body(ByteReader& r, uint8_t type) {
  if ((type & ~uint8_t{0x07}) == kTypeStreamBase) {
    StreamFrame f;
    f.stream_id = r.varint();
    if (type & 0x04) f.offset = r.varint();
    if (type & 0x02) {
      uint64_t len = r.varint();
      if (!r.ok()) return std::nullopt;
      if (len > r.remaining()) {
        r.fail(WireError::Truncated);
        return std::nullopt;
      }
      f.data = r.bytes(size_t(len));
    } else {
      f.data = r.bytes(r.remaining());
    }
    f.fin = (type & 0x01) != 0;
    if (!r.ok()) return std::nullopt;
    return Frame{std::move(f)};
  }
  switch (type) {
    case kTypePing:
      return Frame{PingFrame{}};
    case kTypeAck: {
      AckFrame f;
      f.ranges = get_ranges(r);
      if (!r.ok()) return std::nullopt;
      return Frame{std::move(f)};
    }
    case kTypeRepair: {
      RepairFrame f;
      f.first_ssid = r.varint();
      f.window_count = r.varint();
      f.repair_index = r.varint();
      f.payload = get_var_bytes(r);
      if (!r.ok()) return std::nullopt;
      if (f.window_count == 0) {
        r.fail(WireError::Malformed);
        return std::nullopt;
      }
      return Frame{std::move(f)};
    }
    case kTypeMcAnnounce: {
      McAnnounceFrame f;
      f.channel_id = get_channel_id(r);
      f.use_ipv6 = r.u8() != 0;
      size_t ip_len = f.use_ipv6 ? 16 : 4;
      f.source_ip = r.bytes(ip_len);
      f.group_ip = r.bytes(ip_len);
      f.udp_port = r.u16be();
      f.exp_timer_ms = r.u64be();
      uint64_t at = r.u64be();
      uint64_t pt = r.u64be();
      f.pub_key = get_var_bytes(r);
      if (!r.ok()) return std::nullopt;
      if (at > uint64_t(AuthType::SymTag) || pt > uint64_t(McPathType::Auth)) {
        r.fail(WireError::Malformed);
        return std::nullopt;
      }
      f.auth_type = AuthType(at);
      f.path_type = McPathType(pt);
      return Frame{std::move(f)};
    }
    case kTypeMcState: {
      McStateFrame f;
      f.channel_id = get_channel_id(r);
      f.action = r.u64be();
      f.action_data = r.u64be();
      if (!r.ok()) return std::nullopt;
      return Frame{std::move(f)};
    }
    case kTypeMcKey: {
      McKeyFrame f;
      f.channel_id = get_channel_id(r);
      f.key_secret = get_var_bytes(r);
      f.first_pn = r.u64be();
      f.client_id = r.u64be();
      if (!r.ok()) return std::nullopt;
      return Frame{std::move(f)};
    }
    case kTypeMcNack: {
      McNackFrame f;
      f.channel_id = get_channel_id(r);
      f.p_max = r.u64be();
      f.ranges = get_ranges(r);
      f.fec_nack = get_ranges(r);
      if (!r.ok()) return std::nullopt;
      if (!f.ranges.empty() && f.ranges.max() > f.p_max) {
        r.fail(WireError::Malformed);
        return std::nullopt;
      }
      return Frame{std::move(f)};
    }
    case kTypeMcExpire: {
      McExpireFrame f;
      f.channel_id = get_channel_id(r);
      f.exp_type = r.u8();
      if (f.exp_type & ~uint8_t(kExpirePn | kExpireStream | kExpireFec)) {
        r.fail(WireError::Malformed);
        return std::nullopt;
      }
      if (f.exp_type & kExpirePn) f.pn = r.u64be();
      if (f.exp_type & kExpireStream) f.stream_id = r.u64be();
      if (f.exp_type & kExpireFec) f.fec_metadata = r.u64be();
      if (!r.ok()) return std::nullopt;
      return Frame{std::move(f)};
    }
    case kTypeMcAuth: {
      McAuthFrame f;
      f.channel_id = get_channel_id(r);
      f.pn = r.u64be();
      uint64_t n = r.varint();
      uint64_t prev = 0;
      for (uint64_t i = 0; i < n && r.ok(); ++i) {
        McAuthEntry e;
        e.client_id = r.u64be();
        auto tag = r.bytes(16);
        if (!r.ok()) return std::nullopt;
        std::copy(tag.begin(), tag.end(), e.tag.begin());
        if (i > 0 && e.client_id <= prev) {
          r.fail(WireError::Malformed);
          return std::nullopt;
        }
        prev = e.client_id;
        f.signatures.push_back(e);
      }
      if (!r.ok()) return std::nullopt;
      return Frame{std::move(f)};
    }
    case kTypeMcAsym: {
      McAsymFrame f;
      f.signature = get_var_bytes(r);
      if (!r.ok()) return std::nullopt;
      return Frame{std::move(f)};
    }
    default:
      // kTypeSourceSymbol is handled by decode_frame, which needs the
      // raw input span to slice the inner bytes.
      r.fail(WireError::UnknownType);
      return std::nullopt;
  }
}

}  // namespace

Bytes encode_frame(const Frame& f) {
  FrameEncoder enc;
  std::visit(enc, f);
  return enc.w.take();
}

std::optional<FrameDecode> decode_frame(ByteSpan b, WireError* err) {
  ByteReader r{b};
  uint8_t type = r.u8();
  if (!r.ok()) {
    if (err) *err = r.error();
    return std::nullopt;
  }
  // SourceSymbol needs the raw inner slice; handle it here where the
  // original span is still visible.
  if (type == kTypeSourceSymbol) {
    SourceSymbolFrame f;
    f.ssid = r.varint();
    if (!r.ok()) {
      if (err) *err = r.error();
      return std::nullopt;
    }
    size_t inner_start = r.pos();
    auto inner = decode_frame(b.subspan(inner_start), err);
    if (!inner) return std::nullopt;
    if (std::holds_alternative<SourceSymbolFrame>(inner->frame)) {
      if (err) *err = WireError::Malformed;
      return std::nullopt;
    }
    f.inner = to_bytes(b.subspan(inner_start, inner->consumed));
    return FrameDecode{Frame{std::move(f)}, inner_start + inner->consumed};
  }
  auto frame = decode_body(r, type);
  if (!frame) {
    if (err) *err = r.error();
    return std::nullopt;
  }
  return FrameDecode{std::move(*frame), r.pos()};
}

Bytes encode_header(const PacketHeader& h) {
  ByteWriter w;
  w.u8(uint8_t(h.path));
  w.u8(uint8_t(h.channel_id.size()));
  w.raw(as_span(h.channel_id));
  w.varint(h.packet_number);
  return w.take();
}

std::optional<PacketHeader> decode_header(ByteReader& r) {
  PacketHeader h;
  uint8_t path = r.u8();
  if (!r.ok() || path > uint8_t(PathKind::McAuth)) {
    r.fail(WireError::Malformed);
    return std::nullopt;
  }
  h.path = PathKind(path);
  h.channel_id = get_channel_id(r);
  h.packet_number = r.varint();
  if (!r.ok()) return std::nullopt;
  return h;
}

std::optional<Bytes> assemble_packet(const PacketHeader& h,
                                     const std::vector<Frame>& frames,
                                     size_t max_plain_len) {
  ByteWriter w;
  w.raw(as_span(encode_header(h)));
  size_t frame_bytes = 0;
  for (const auto& f : frames) {
    Bytes enc = encode_frame(f);
    frame_bytes += enc.size();
    if (frame_bytes > max_plain_len) return std::nullopt;
    w.raw(as_span(enc));
  }
  return w.take();
}

std::optional<std::vector<Frame>> parse_packet_payload(ByteSpan b,
                                                       WireError* err) {
  std::vector<Frame> out;
  size_t pos = 0;
  while (pos < b.size()) {
    auto dec = decode_frame(b.subspan(pos), err);
    if (!dec) return std::nullopt;
    out.push_back(std::move(dec->frame));
    pos += dec->consumed;
  }
  return out;
}

const char* auth_type_name(AuthType t) {
  switch (t) {
    case AuthType::None: return "none";
    case AuthType::AsymPacket: return "asym_packet";
    case AuthType::AsymStream: return "asym_stream";
    case AuthType::SymTag: return "sym_tag";
  }
  return "?";
}

std::optional<AuthType> auth_type_from_name(const std::string& s) {
  if (s == "none") return AuthType::None;
  if (s == "asym_packet") return AuthType::AsymPacket;
  if (s == "asym_stream") return AuthType::AsymStream;
  if (s == "sym_tag") return AuthType::SymTag;
  return std::nullopt;
}

}  // namespace mcquic
