#pragma once

#include <array>
#include <compare>
#include <optional>
#include <variant>
#include <vector>

#include "mcquic/bytes.hpp"
#include "mcquic/varint.hpp"

namespace mcquic {

// Frame-type codes live in a private experimental range; no interop claim.
inline constexpr uint8_t kTypePing = 0x01;
inline constexpr uint8_t kTypeAck = 0x02;
inline constexpr uint8_t kTypeStreamBase = 0x08;  // low 3 bits: OFF|LEN|FIN
inline constexpr uint8_t kTypeMcAnnounce = 0x31;
inline constexpr uint8_t kTypeMcState = 0x32;
inline constexpr uint8_t kTypeMcKey = 0x33;
inline constexpr uint8_t kTypeMcNack = 0x34;
inline constexpr uint8_t kTypeMcExpire = 0x35;
inline constexpr uint8_t kTypeMcAuth = 0x36;
inline constexpr uint8_t kTypeMcAsym = 0x37;
inline constexpr uint8_t kTypeRepair = 0x38;
inline constexpr uint8_t kTypeSourceSymbol = 0x39;

inline constexpr size_t kMaxChannelIdLen = 20;

struct PnRange {
  uint64_t lo = 0;
  uint64_t hi = 0;
  auto operator<=>(const PnRange&) const = default;
};

/// Ordered, disjoint, inclusive packet-number ranges. Insertion merges
/// adjacent and overlapping ranges; the canonical form is independent
/// of insertion order.
class PnRangeSet {
 public:
  PnRangeSet() = default;

  void insert(uint64_t pn) { insert_range(pn, pn); }
  void insert_range(uint64_t lo, uint64_t hi);

  bool contains(uint64_t pn) const;
  bool empty() const { return ranges_.empty(); }
  size_t size() const { return ranges_.size(); }
  uint64_t count() const;  // total PNs covered

  uint64_t min() const { return ranges_.front().lo; }
  uint64_t max() const { return ranges_.back().hi; }

  /// Drops everything <= pn.
  void erase_up_to(uint64_t pn);

  /// Missing PNs within [lo, hi], as a canonical range set.
  PnRangeSet gaps_within(uint64_t lo, uint64_t hi) const;

  const std::vector<PnRange>& ranges() const { return ranges_; }

  auto operator<=>(const PnRangeSet&) const = default;

 private:
  std::vector<PnRange> ranges_;
};

enum class PathKind : uint8_t { Unicast = 0, McData = 1, McAuth = 2 };
enum class AuthType : uint8_t { None = 0, AsymPacket = 1, AsymStream = 2, SymTag = 3 };
enum class McPathType : uint8_t { Data = 0, Auth = 1 };
enum class McAction : uint64_t { Join = 0, Leave = 1 };

struct PacketHeader {
  PathKind path = PathKind::Unicast;
  Bytes channel_id;  // 1..20 bytes
  uint64_t packet_number = 0;
  auto operator<=>(const PacketHeader&) const = default;
};

struct PingFrame {
  auto operator<=>(const PingFrame&) const = default;
};

struct AckFrame {
  PnRangeSet ranges;
  auto operator<=>(const AckFrame&) const = default;
};

struct StreamFrame {
  uint64_t stream_id = 0;
  uint64_t offset = 0;
  bool fin = false;
  Bytes data;
  auto operator<=>(const StreamFrame&) const = default;
};

/// FEC protection wrapper. `inner` holds the encoded protected frame;
/// it is exactly the byte string the FEC window stores as the symbol
/// payload, so wrapping is cheap and recovery is byte-exact.
struct SourceSymbolFrame {
  uint64_t ssid = 0;
  Bytes inner;
  auto operator<=>(const SourceSymbolFrame&) const = default;
};

struct RepairFrame {
  uint64_t first_ssid = 0;
  uint64_t window_count = 0;
  uint64_t repair_index = 0;
  Bytes payload;
  auto operator<=>(const RepairFrame&) const = default;
};

struct McAnnounceFrame {
  Bytes channel_id;
  bool use_ipv6 = false;
  Bytes source_ip;  // 4 or 16 bytes, per use_ipv6
  Bytes group_ip;
  uint16_t udp_port = 0;
  uint64_t exp_timer_ms = 0;
  AuthType auth_type = AuthType::None;
  McPathType path_type = McPathType::Data;
  Bytes pub_key;  // present iff auth_type is asymmetric
  auto operator<=>(const McAnnounceFrame&) const = default;
};

struct McStateFrame {
  Bytes channel_id;
  uint64_t action = 0;  // McAction
  uint64_t action_data = 0;
  auto operator<=>(const McStateFrame&) const = default;
};

struct McKeyFrame {
  Bytes channel_id;
  Bytes key_secret;
  uint64_t first_pn = 0;
  uint64_t client_id = 0;
  auto operator<=>(const McKeyFrame&) const = default;
};

struct McNackFrame {
  Bytes channel_id;
  uint64_t p_max = 0;
  PnRangeSet ranges;    // missing packet numbers, all <= p_max
  PnRangeSet fec_nack;  // missing SSIDs; may be empty
  auto operator<=>(const McNackFrame&) const = default;
};

// exp_type bitmap bits; a field is encoded iff its bit is set.
inline constexpr uint8_t kExpirePn = 0x01;
inline constexpr uint8_t kExpireStream = 0x02;
inline constexpr uint8_t kExpireFec = 0x04;

struct McExpireFrame {
  Bytes channel_id;
  uint8_t exp_type = 0;
  uint64_t pn = 0;            // highest expired packet number
  uint64_t stream_id = 0;     // highest expired stream id
  uint64_t fec_metadata = 0;  // highest expired SSID
  auto operator<=>(const McExpireFrame&) const = default;
};

struct McAuthEntry {
  uint64_t client_id = 0;
  std::array<uint8_t, 16> tag{};
  auto operator<=>(const McAuthEntry&) const = default;
};

struct McAuthFrame {
  Bytes channel_id;
  uint64_t pn = 0;  // packet number this frame authenticates
  std::vector<McAuthEntry> signatures;  // strictly increasing client_id
  auto operator<=>(const McAuthFrame&) const = default;
};

struct McAsymFrame {
  Bytes signature;
  auto operator<=>(const McAsymFrame&) const = default;
};

using Frame = std::variant<PingFrame, AckFrame, StreamFrame, SourceSymbolFrame,
                           RepairFrame, McAnnounceFrame, McStateFrame,
                           McKeyFrame, McNackFrame, McExpireFrame, McAuthFrame,
                           McAsymFrame>;

Bytes encode_frame(const Frame& f);

struct FrameDecode {
  Frame frame;
  size_t consumed = 0;
};

struct DecodeFailure {
  WireError error = WireError::None;
};

/// Decodes one frame from the front of `b`.
std::optional<FrameDecode> decode_frame(ByteSpan b, WireError* err = nullptr);

Bytes encode_header(const PacketHeader& h);
std::optional<PacketHeader> decode_header(ByteReader& r);

/// Header bytes followed by the frame encodings in order. Returns
/// nullopt when the concatenated frames exceed max_plain_len (the
/// caller must split).
std::optional<Bytes> assemble_packet(const PacketHeader& h,
                                     const std::vector<Frame>& frames,
                                     size_t max_plain_len);

/// Inverse of the payload part of assemble_packet: consumes the whole
/// buffer; trailing garbage or a truncated frame is an error.
std::optional<std::vector<Frame>> parse_packet_payload(ByteSpan b,
                                                       WireError* err = nullptr);

const char* auth_type_name(AuthType t);
std::optional<AuthType> auth_type_from_name(const std::string& s);

}  // namespace mcquic
