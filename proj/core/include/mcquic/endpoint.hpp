#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "mcquic/crypto.hpp"
#include "mcquic/fec.hpp"
#include "mcquic/wire.hpp"

namespace mcquic {

struct EndpointConfig {
  uint64_t et_ms = 350;
  AuthType auth_type = AuthType::None;
  size_t max_packet_size = 1350;
  size_t fec_max_window = 240;
  uint64_t max_nb_repair = 32;
  uint64_t nack_delay_ms = 25;
  uint64_t ping_interval_ms = 100;
  bool scheduler_literal = false;
  bool fec_enabled = true;
  bool emit_empty_expire = false;
  size_t auth_buffer_cap = 1024;
  uint64_t ack_delay_ms = 25;
  uint64_t rto_ms = 100;
};

constexpr int64_t ms_to_ns(uint64_t ms) { return int64_t(ms) * 1'000'000; }

struct DeliveryEvent {
  enum class Kind { StreamData, StreamReset, JoinedGroup, LeftGroup, AuthFailure };
  Kind kind{};
  int64_t time_ns = 0;
  uint64_t stream_id = 0;
  Bytes data;
  bool authenticated = false;
  uint64_t pn = 0;  // AuthFailure only
};

struct OutDatagram {
  PathKind path = PathKind::Unicast;
  uint64_t to_client = 0;  // unicast destination; ignored for group paths
  Bytes bytes;
};

enum class Membership { Unicast, JoinSent, Joined, LeaveSent };

/// One direction-pair of a reliable unicast path: packetization,
/// acknowledgment, loss detection (packet threshold + RTO) and
/// retransmission of whatever was queued as retransmittable.
class UcTransport {
 public:
  struct Chunk {
    uint64_t stream_id = 0;
    uint64_t offset = 0;
    uint32_t len = 0;
    bool fin = false;
  };

  // Resolves a stream id to its full backing data for chunk framing.
  using StreamDataFn = std::function<ByteSpan(uint64_t stream_id)>;

  UcTransport(const EndpointConfig* cfg, Bytes cid, AeadKeys tx_keys,
              AeadKeys rx_keys)
      : cfg_(cfg), cid_(std::move(cid)), tx_keys_(tx_keys), rx_keys_(rx_keys) {}

  void queue_control(Frame f, bool retransmittable, uint32_t marker = 0);
  void queue_chunk(const Chunk& c);

  struct Input {
    std::vector<Frame> frames;      // non-ACK frames, wire order
    std::vector<uint32_t> acked_markers;
    uint64_t pn = 0;
    bool ok = false;  // false: AEAD or parse failure
  };
  Input on_datagram(ByteSpan dgram, int64_t now);

  /// Emits due packets: queued control/chunks, retransmissions, acks.
  void flush(int64_t now, const StreamDataFn& data, std::vector<Bytes>& out);
  void tick(int64_t now, const StreamDataFn& data, std::vector<Bytes>& out);

  bool has_unacked() const { return !unacked_.empty(); }
  const Bytes& cid() const { return cid_; }

 private:
  struct QueuedControl {
    Frame frame;
    bool retransmittable;
    uint32_t marker;
  };

  struct SentPacket {
    int64_t time_sent = 0;
    std::vector<QueuedControl> control;  // retransmittable control frames
    std::vector<Chunk> chunks;
    bool ack_eliciting = false;
  };

  void build_packets(int64_t now, const StreamDataFn& data,
                     std::vector<Bytes>& out, bool include_ack);
  void on_ack(const PnRangeSet& ranges, Input& input);

  const EndpointConfig* cfg_;
  Bytes cid_;
  AeadKeys tx_keys_;
  AeadKeys rx_keys_;

  uint64_t next_pn_ = 0;
  std::map<uint64_t, SentPacket> unacked_;
  uint64_t largest_acked_ = 0;

  std::deque<QueuedControl> ctrl_queue_;
  std::deque<Chunk> chunk_queue_;

  PnRangeSet received_;
  bool ack_pending_ = false;
  int64_t ack_armed_at_ = 0;
};

struct ServerCounters {
  uint64_t bytes_uc = 0;
  uint64_t bytes_mc_data = 0;
  uint64_t bytes_mc_auth = 0;
  uint64_t packets_mc_data = 0;
  uint64_t repairs_sent = 0;
  uint64_t nacks_received = 0;
  uint64_t unknown_nack_pns = 0;
  uint64_t streams_opened = 0;
  uint64_t expire_frames_sent = 0;
  uint64_t stalled_sends = 0;
  uint64_t protocol_violations = 0;
};

struct ClientCounters {
  uint64_t bytes_uc = 0;
  uint64_t bytes_membership = 0;  // packets carrying MC_STATE
  uint64_t nacks_sent = 0;
  uint64_t auth_failures = 0;
  uint64_t delivered_bytes = 0;
  uint64_t delivered_streams = 0;
  uint64_t reset_streams = 0;
  uint64_t recovered_symbols = 0;
  uint64_t mc_data_packets = 0;
  uint64_t malformed_packets = 0;
};

struct HandshakeResult {
  uint64_t client_id = 0;
  bool mc_accepted = false;
  std::array<uint8_t, 32> uc_secret{};
  Bytes uc_cid;
};

/// The server side: the multicast source plus one unicast session per
/// client, sharing the sending state Listing-1 style scheduling needs.
class Server {
 public:
  Server(EndpointConfig cfg, uint64_t seed);

  /// Stub handshake replacing the TLS exchange: both sides' multicast
  /// support flags meet here; unicast keys come from a seeded secret.
  HandshakeResult connect_client(bool client_supports_mc, int64_t now);

  enum class SendResult { Ok, Stalled };
  SendResult send_stream(ByteSpan data, int64_t now);

  void on_datagram(uint64_t from_client, ByteSpan dgram, int64_t now);
  void tick(int64_t now);
  std::vector<OutDatagram> take_outbox();

  /// Feeds the repair scheduler as if an MC_NACK had arrived; lets
  /// benchmarks and tests drive Listing-1 state without a network.
  void inject_nack(const PnRangeSet& ranges, uint64_t p_max);

  const ServerCounters& counters() const { return counters_; }
  const EndpointConfig& config() const { return cfg_; }
  uint64_t streams_opened() const { return next_stream_id_; }
  uint64_t next_mc_pn() const { return next_pn_mc_data_; }
  size_t fec_window_size() const { return window_.size(); }
  uint64_t scheduler_backlog() const { return scheduler_.nb_to_send(); }
  size_t joined_count() const;
  const std::array<uint8_t, 32>& public_key() const {
    return signing_.public_key;
  }

 private:
  struct StreamInfo {
    Bytes data;
    int64_t open_time = 0;
    bool on_mc = false;
  };

  struct Session {
    uint64_t client_id = 0;
    bool mc_accepted = false;
    bool announced = false;
    bool joined = false;
    bool key_sent = false;
    AeadKeys sym_tag_keys;  // server-to-client key, reused by the tag scheme
    std::unique_ptr<UcTransport> uc;
  };

  Bytes rand_bytes(size_t n);
  void flush_session(Session& s, int64_t now);
  void flush_all(int64_t now);
  void enqueue_stream_uc(Session& s, uint64_t stream_id);
  void send_stream_mc(uint64_t stream_id, int64_t now);
  void emit_mc_data_packet(std::vector<Frame> frames, bool reliable,
                           std::optional<PnRange> ssids, bool is_repair,
                           int64_t now);
  void emit_auth_tags(ByteSpan sealed_data_packet, uint64_t data_pn,
                      int64_t now);
  void handle_state(Session& s, const McStateFrame& f, int64_t now);
  void handle_nack(Session& s, const McNackFrame& f, int64_t now);
  void expire_tick(int64_t now);
  void repair_round(int64_t now);
  size_t mc_chunk_budget() const;

  EndpointConfig cfg_;
  std::mt19937_64 rng_;
  ServerCounters counters_;

  std::array<uint8_t, 32> group_secret_{};
  AeadKeys group_keys_;
  SigningKeys signing_;
  Bytes mc_data_cid_;
  Bytes mc_auth_cid_;

  uint64_t next_client_id_ = 1;
  std::map<uint64_t, Session> sessions_;

  uint64_t next_stream_id_ = 0;
  std::map<uint64_t, StreamInfo> streams_;

  uint64_t next_pn_mc_data_ = 0;
  uint64_t next_pn_mc_auth_ = 0;
  SentLog sent_log_;
  FecWindow window_;
  RepairScheduler scheduler_;
  uint64_t next_repair_index_ = 0;
  std::pair<uint64_t, size_t> last_repair_snapshot_{0, 0};

  int64_t last_expire_trigger_ = 0;
  int64_t prev_expire_trigger_ = 0;
  std::optional<uint64_t> exp_pn_floor_;
  std::optional<uint64_t> exp_stream_floor_;
  std::optional<uint64_t> exp_ssid_floor_;

  int64_t last_mc_send_ = 0;
  std::vector<OutDatagram> outbox_;
};

/// Client state machine: membership, PN/gap tracking, NACK pacing,
/// stream reassembly, FEC recovery and the three source-auth pipelines.
class Client {
 public:
  Client(EndpointConfig cfg, uint64_t seed, bool supports_mc);

  void install_session(const HandshakeResult& hs);

  /// Arms the join; the MC_STATE(JOIN) goes out once the announce has
  /// been seen (joining an unannounced channel is a violation).
  void join(int64_t now);
  void leave(int64_t now);

  void on_datagram(PathKind path, ByteSpan dgram, int64_t now);
  void tick(int64_t now);
  std::vector<OutDatagram> take_outbox();
  std::vector<DeliveryEvent> take_events();

  bool supports_mc() const { return supports_mc_; }
  bool listening() const {
    return membership_ == Membership::JoinSent ||
           membership_ == Membership::Joined;
  }
  Membership membership() const { return membership_; }
  uint64_t client_id() const { return client_id_; }
  const ClientCounters& counters() const { return counters_; }

  /// Current NACK-worthy gaps (exposed for tests).
  PnRangeSet needed_gaps() const;

 private:
  struct Reassembly {
    std::map<uint64_t, Bytes> segments;  // offset -> bytes
    std::optional<uint64_t> fin_len;
    bool complete() const;
    Bytes assemble() const;
  };

  struct PacketMeta {
    bool has_ssids = false;
    uint64_t ssid_lo = 0;
    uint64_t ssid_hi = 0;
  };

  void handle_uc_frames(std::vector<Frame>& frames, int64_t now);
  void handle_announce(const McAnnounceFrame& f, int64_t now);
  void handle_key(const McKeyFrame& f, int64_t now);
  void on_mc_data(ByteSpan dgram, int64_t now);
  void on_mc_auth(ByteSpan dgram, int64_t now);
  void process_mc_plaintext(uint64_t pn, ByteSpan plain, int64_t now);
  void process_mc_frame(const Frame& f, uint64_t pn, int64_t now,
                        uint64_t* last_stream_in_packet);
  void accept_symbol(uint64_t ssid, ByteSpan frame_bytes, uint64_t pn,
                     int64_t now);
  void handle_stream_frame(const StreamFrame& f, bool mc_path, int64_t now);
  void handle_asym_signature(uint64_t stream_id, Bytes sig, int64_t now);
  void handle_expire(const McExpireFrame& f, int64_t now);
  void try_recover(int64_t now);
  void try_complete_stream(uint64_t stream_id, int64_t now);
  void verify_buffered_sym_tag(uint64_t pn, int64_t now);
  void send_join(int64_t now);
  void maybe_send_nack(int64_t now);
  uint64_t nack_floor() const;
  uint64_t delivered_need_floor() const;
  void emit_auth_failure(uint64_t pn, int64_t now);

  EndpointConfig cfg_;
  std::mt19937_64 rng_;
  bool supports_mc_;
  ClientCounters counters_;

  uint64_t client_id_ = 0;
  std::unique_ptr<UcTransport> uc_;
  AeadKeys sym_tag_keys_;  // same derivation the server tags with

  Membership membership_ = Membership::Unicast;
  bool join_armed_ = false;
  bool announce_seen_ = false;
  std::optional<McAnnounceFrame> announce_data_;
  std::optional<McAnnounceFrame> announce_auth_;
  std::optional<AeadKeys> group_keys_;
  uint64_t first_pn_ = 0;

  // mc data path receive state
  PnRangeSet received_;
  std::map<uint64_t, PacketMeta> received_meta_;
  std::optional<uint64_t> exp_pn_floor_;
  std::optional<uint64_t> exp_stream_floor_;
  std::optional<uint64_t> exp_ssid_floor_;
  int64_t last_nack_ = INT64_MIN / 2;

  // FEC state
  std::map<uint64_t, Bytes> symbols_;
  PnRangeSet symbol_set_;
  std::vector<RepairSymbol> repairs_;
  std::map<uint64_t, uint64_t> ssid_stream_;       // Stream-symbol ssid -> stream id
  std::map<uint64_t, Bytes> pending_asym_by_ssid_; // McAsym ssid -> signature

  // streams
  std::map<uint64_t, Reassembly> reassembly_;
  PnRangeSet delivered_ids_;
  std::map<uint64_t, Bytes> stream_signatures_;  // AsymStream, bound sigs
  std::set<uint64_t> mc_streams_seen_;

  // SymTag buffers
  std::map<uint64_t, Bytes> auth_buffer_;        // pn -> sealed datagram
  std::map<uint64_t, std::array<uint8_t, 16>> pending_tags_;

  // pre-key buffer for packets that arrive between JOIN and MC_KEY
  std::vector<std::pair<PathKind, Bytes>> prekey_buffer_;

  std::vector<OutDatagram> outbox_;
  std::vector<DeliveryEvent> events_;
};

}  // namespace mcquic
