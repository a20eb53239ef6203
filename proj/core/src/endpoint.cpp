#include "mcquic/endpoint.hpp"

#include <algorithm>
#include <cassert>

namespace mcquic {

namespace {

constexpr uint32_t kLeaveMarker = 1;
constexpr uint64_t kReorderThreshold = 3;
constexpr size_t kPrekeyBufferCap = 4096;

// Worst-case header length: kind + cid length byte + cid + 8-byte pn.
size_t header_budget(size_t cid_len) { return 2 + cid_len + 8; }

// Room a symbol needs when re-framed inside a REPAIR frame:
// type + 3 varints + length varint + the 2-byte length prefix.
constexpr size_t kRepairFrameSlack = 31;
// Stream frame header: type + stream id + offset + length varints.
constexpr size_t kStreamFrameSlack = 25;

Bytes build_sealed_packet(const AeadKeys& keys, const PacketHeader& h,
                          const std::vector<Frame>& frames) {
  Bytes hdr = encode_header(h);
  ByteWriter payload;
  for (const auto& f : frames) payload.raw(as_span(encode_frame(f)));
  Bytes plain = payload.take();
  Bytes sealed =
      seal_packet(keys, as_span(hdr), as_span(plain), h.packet_number, h.path);
  Bytes out;
  out.reserve(hdr.size() + sealed.size());
  out.insert(out.end(), hdr.begin(), hdr.end());
  out.insert(out.end(), sealed.begin(), sealed.end());
  return out;
}

// Acks carry at most the newest ranges so a long session cannot
// outgrow the packet budget.
constexpr size_t kMaxAckRanges = 64;

AckFrame capped_ack(const PnRangeSet& received) {
  AckFrame ack;
  const auto& rs = received.ranges();
  size_t start = rs.size() > kMaxAckRanges ? rs.size() - kMaxAckRanges : 0;
  for (size_t i = start; i < rs.size(); ++i) {
    ack.ranges.insert_range(rs[i].lo, rs[i].hi);
  }
  return ack;
}

}  // namespace

// ---------------------------------------------------------------------------
// UcTransport

void UcTransport::queue_control(Frame f, bool retransmittable,
                                uint32_t marker) {
  ctrl_queue_.push_back({std::move(f), retransmittable, marker});
}

void UcTransport::queue_chunk(const Chunk& c) { chunk_queue_.push_back(c); }

UcTransport::Input UcTransport::on_datagram(ByteSpan dgram, int64_t now) {
  Input in;
  ByteReader r{dgram};
  auto hdr = decode_header(r);
  if (!hdr || hdr->path != PathKind::Unicast) return in;
  ByteSpan hdr_bytes = dgram.subspan(0, r.pos());
  auto plain = open_packet(rx_keys_, hdr_bytes, dgram.subspan(r.pos()),
                           hdr->packet_number, PathKind::Unicast);
  if (!plain) return in;
  auto frames = parse_packet_payload(as_span(*plain));
  if (!frames) return in;
  in.ok = true;
  in.pn = hdr->packet_number;
  bool eliciting = false;
  for (auto& f : *frames) {
    if (auto* ack = std::get_if<AckFrame>(&f)) {
      on_ack(ack->ranges, in);
    } else {
      in.frames.push_back(std::move(f));
      eliciting = true;
    }
  }
  received_.insert(in.pn);
  if (eliciting && !ack_pending_) {
    ack_pending_ = true;
    ack_armed_at_ = now;
  }
  return in;
}

void UcTransport::on_ack(const PnRangeSet& ranges, Input& input) {
  if (ranges.empty()) return;
  largest_acked_ = std::max(largest_acked_, ranges.max());
  for (const auto& r : ranges.ranges()) {
    auto it = unacked_.lower_bound(r.lo);
    while (it != unacked_.end() && it->first <= r.hi) {
      for (const auto& qc : it->second.control) {
        if (qc.marker) input.acked_markers.push_back(qc.marker);
      }
      it = unacked_.erase(it);
    }
  }
  // Packet-threshold loss detection: anything reorder-window behind the
  // largest acked PN is declared lost and requeued.
  std::vector<uint64_t> lost;
  for (const auto& [pn, rec] : unacked_) {
    if (pn + kReorderThreshold <= largest_acked_) lost.push_back(pn);
  }
  for (uint64_t pn : lost) {
    auto node = unacked_.extract(pn);
    for (auto& qc : node.mapped().control) {
      ctrl_queue_.push_back(std::move(qc));
    }
    for (const auto& c : node.mapped().chunks) chunk_queue_.push_back(c);
  }
}

void UcTransport::build_packets(int64_t now, const StreamDataFn& data,
                                std::vector<Bytes>& out, bool include_ack) {
  size_t budget = cfg_->max_packet_size - header_budget(cid_.size()) -
                  kAeadTagLen;
  while (!ctrl_queue_.empty() || !chunk_queue_.empty()) {
    std::vector<Frame> frames;
    SentPacket rec;
    rec.time_sent = now;
    size_t used = 0;
    if (ack_pending_) {
      AckFrame ack = capped_ack(received_);
      size_t len = encode_frame(Frame{ack}).size();
      if (len <= budget) {
        frames.push_back(Frame{std::move(ack)});
        used += len;
        ack_pending_ = false;
      }
    }
    while (!ctrl_queue_.empty()) {
      size_t len = encode_frame(ctrl_queue_.front().frame).size();
      if (used + len > budget) break;
      auto qc = std::move(ctrl_queue_.front());
      ctrl_queue_.pop_front();
      used += len;
      rec.ack_eliciting = true;
      frames.push_back(qc.frame);
      if (qc.retransmittable) rec.control.push_back(std::move(qc));
    }
    while (!chunk_queue_.empty() && used + kStreamFrameSlack < budget) {
      Chunk c = chunk_queue_.front();
      chunk_queue_.pop_front();
      size_t avail = budget - used - kStreamFrameSlack;
      uint32_t take = uint32_t(std::min<size_t>(c.len, avail));
      if (take < c.len) {
        chunk_queue_.push_front(
            {c.stream_id, c.offset + take, c.len - take, c.fin});
        c.len = take;
        c.fin = false;
      }
      ByteSpan full = data(c.stream_id);
      StreamFrame sf;
      sf.stream_id = c.stream_id;
      sf.offset = c.offset;
      sf.fin = c.fin;
      sf.data = to_bytes(full.subspan(c.offset, c.len));
      used += encode_frame(Frame{sf}).size();
      frames.push_back(Frame{std::move(sf)});
      rec.chunks.push_back(c);
      rec.ack_eliciting = true;
    }
    if (frames.empty()) break;  // nothing fit (oversized control frame)
    uint64_t pn = next_pn_++;
    out.push_back(build_sealed_packet(
        tx_keys_, {PathKind::Unicast, cid_, pn}, frames));
    if (!rec.control.empty() || !rec.chunks.empty()) unacked_[pn] = rec;
  }
  if (include_ack && ack_pending_ &&
      now - ack_armed_at_ >= ms_to_ns(cfg_->ack_delay_ms)) {
    AckFrame ack = capped_ack(received_);
    uint64_t pn = next_pn_++;
    out.push_back(build_sealed_packet(tx_keys_, {PathKind::Unicast, cid_, pn},
                                      {Frame{std::move(ack)}}));
    ack_pending_ = false;
  }
}

void UcTransport::flush(int64_t now, const StreamDataFn& data,
                        std::vector<Bytes>& out) {
  build_packets(now, data, out, /*include_ack=*/false);
}

void UcTransport::tick(int64_t now, const StreamDataFn& data,
                       std::vector<Bytes>& out) {
  // RTO: requeue anything that sat unacked too long.
  std::vector<uint64_t> expired;
  for (const auto& [pn, rec] : unacked_) {
    if (now - rec.time_sent >= ms_to_ns(cfg_->rto_ms)) expired.push_back(pn);
  }
  for (uint64_t pn : expired) {
    auto node = unacked_.extract(pn);
    for (auto& qc : node.mapped().control) {
      ctrl_queue_.push_back(std::move(qc));
    }
    for (const auto& c : node.mapped().chunks) chunk_queue_.push_back(c);
  }
  build_packets(now, data, out, /*include_ack=*/true);
}

// ---------------------------------------------------------------------------
// Server

Server::Server(EndpointConfig cfg, uint64_t seed)
    : cfg_(cfg),
      rng_(seed),
      window_(cfg.fec_max_window),
      scheduler_(cfg.max_nb_repair, cfg.scheduler_literal) {
  Bytes gs = rand_bytes(kGroupSecretLen);
  std::copy(gs.begin(), gs.end(), group_secret_.begin());
  group_keys_ = derive_group_keys(as_span(gs));
  signing_ = SigningKeys::from_seed(as_span(rand_bytes(32)));
  mc_data_cid_ = rand_bytes(8);
  mc_auth_cid_ = rand_bytes(8);
}

Bytes Server::rand_bytes(size_t n) {
  Bytes out(n);
  for (auto& b : out) b = uint8_t(rng_());
  return out;
}

size_t Server::joined_count() const {
  size_t n = 0;
  for (const auto& [id, s] : sessions_) n += s.joined ? 1 : 0;
  return n;
}

HandshakeResult Server::connect_client(bool client_supports_mc, int64_t now) {
  uint64_t id = next_client_id_++;
  Session s;
  s.client_id = id;
  s.mc_accepted = client_supports_mc;  // server side always supports mc
  Bytes secret = rand_bytes(kGroupSecretLen);
  Bytes cid = rand_bytes(8);
  AeadKeys tx = derive_unicast_keys(as_span(secret), true);
  AeadKeys rx = derive_unicast_keys(as_span(secret), false);
  s.sym_tag_keys = tx;
  s.uc = std::make_unique<UcTransport>(&cfg_, cid, tx, rx);
  if (s.mc_accepted) {
    McAnnounceFrame ann;
    ann.channel_id = mc_data_cid_;
    ann.use_ipv6 = false;
    ann.source_ip = {10, 0, 0, 1};
    ann.group_ip = {232, 1, 1, 1};
    ann.udp_port = 5000;
    ann.exp_timer_ms = cfg_.et_ms;
    ann.auth_type = cfg_.auth_type;
    ann.path_type = McPathType::Data;
    if (cfg_.auth_type == AuthType::AsymPacket ||
        cfg_.auth_type == AuthType::AsymStream) {
      ann.pub_key = Bytes(signing_.public_key.begin(),
                          signing_.public_key.end());
    }
    s.uc->queue_control(Frame{ann}, true);
    if (cfg_.auth_type == AuthType::SymTag) {
      McAnnounceFrame auth_ann = ann;
      auth_ann.channel_id = mc_auth_cid_;
      auth_ann.udp_port = 5001;
      auth_ann.path_type = McPathType::Auth;
      auth_ann.pub_key.clear();
      s.uc->queue_control(Frame{auth_ann}, true);
    }
    s.announced = true;
  }
  HandshakeResult hs;
  hs.client_id = id;
  hs.mc_accepted = s.mc_accepted;
  std::copy(secret.begin(), secret.end(), hs.uc_secret.begin());
  hs.uc_cid = cid;
  auto [it, inserted] = sessions_.emplace(id, std::move(s));
  flush_session(it->second, now);
  return hs;
}

void Server::flush_session(Session& s, int64_t now) {
  std::vector<Bytes> dgrams;
  auto provider = [this](uint64_t stream_id) -> ByteSpan {
    return as_span(streams_.at(stream_id).data);
  };
  s.uc->flush(now, provider, dgrams);
  for (auto& d : dgrams) {
    counters_.bytes_uc += d.size();
    outbox_.push_back({PathKind::Unicast, s.client_id, std::move(d)});
  }
}

void Server::flush_all(int64_t now) {
  for (auto& [id, s] : sessions_) flush_session(s, now);
}

size_t Server::mc_chunk_budget() const {
  size_t plain = cfg_.max_packet_size - header_budget(mc_data_cid_.size()) -
                 kAeadTagLen;
  if (cfg_.auth_type == AuthType::AsymPacket) plain -= kSignatureLen;
  if (cfg_.fec_enabled) plain -= kRepairFrameSlack;
  return plain - kStreamFrameSlack;
}

Server::SendResult Server::send_stream(ByteSpan data, int64_t now) {
  assert(!data.empty());
  bool joined_any = joined_count() > 0;
  size_t chunk = mc_chunk_budget();
  if (joined_any && cfg_.fec_enabled) {
    size_t needed = (data.size() + chunk - 1) / chunk +
                    (cfg_.auth_type == AuthType::AsymStream ? 1 : 0);
    if (window_.size() + needed > window_.max_window()) {
      ++counters_.stalled_sends;
      return SendResult::Stalled;
    }
  }
  uint64_t id = next_stream_id_++;
  ++counters_.streams_opened;
  StreamInfo info;
  info.data = to_bytes(data);
  info.open_time = now;
  info.on_mc = joined_any;
  streams_.emplace(id, std::move(info));
  if (joined_any) send_stream_mc(id, now);
  for (auto& [cid, s] : sessions_) {
    if (!s.joined) enqueue_stream_uc(s, id);
  }
  flush_all(now);
  return SendResult::Ok;
}

void Server::enqueue_stream_uc(Session& s, uint64_t stream_id) {
  const auto& info = streams_.at(stream_id);
  s.uc->queue_chunk({stream_id, 0, uint32_t(info.data.size()), true});
}

void Server::send_stream_mc(uint64_t stream_id, int64_t now) {
  const Bytes& data = streams_.at(stream_id).data;
  size_t chunk = mc_chunk_budget();
  size_t plain_budget = cfg_.max_packet_size -
                        header_budget(mc_data_cid_.size()) - kAeadTagLen;
  if (cfg_.auth_type == AuthType::AsymPacket) plain_budget -= kSignatureLen;

  struct PendingPacket {
    std::vector<Frame> frames;
    std::optional<PnRange> ssids;
  };
  std::vector<PendingPacket> pending;
  size_t offset = 0;
  while (offset < data.size()) {
    size_t take = std::min(chunk, data.size() - offset);
    StreamFrame sf;
    sf.stream_id = stream_id;
    sf.offset = offset;
    sf.fin = offset + take == data.size();
    sf.data = Bytes(data.begin() + offset, data.begin() + offset + take);
    offset += take;
    PendingPacket pp;
    if (cfg_.fec_enabled) {
      Bytes enc = encode_frame(Frame{std::move(sf)});
      auto ssid = window_.map_frame(as_span(enc));
      assert(ssid);  // capacity pre-checked in send_stream
      pp.ssids = PnRange{*ssid, *ssid};
      pp.frames.push_back(Frame{SourceSymbolFrame{*ssid, std::move(enc)}});
    } else {
      pp.frames.push_back(Frame{std::move(sf)});
    }
    pending.push_back(std::move(pp));
  }
  if (cfg_.auth_type == AuthType::AsymStream) {
    // The signature frame follows the last STREAM frame; with FEC on it
    // maps to the SSID right after the final data symbol so receivers
    // can associate the two after recovery.
    auto sig = sign_stream(signing_, stream_id, as_span(data));
    McAsymFrame ma;
    ma.signature = Bytes(sig.begin(), sig.end());
    Frame asym_frame{std::move(ma)};
    uint64_t asym_ssid = 0;
    if (cfg_.fec_enabled) {
      Bytes enc = encode_frame(asym_frame);
      auto ssid = window_.map_frame(as_span(enc));
      assert(ssid);
      asym_ssid = *ssid;
      asym_frame = Frame{SourceSymbolFrame{*ssid, std::move(enc)}};
    }
    size_t enc_size = encode_frame(asym_frame).size();
    auto& last = pending.back();
    size_t last_size = 0;
    for (const auto& f : last.frames) last_size += encode_frame(f).size();
    if (last_size + enc_size <= plain_budget) {
      last.frames.push_back(std::move(asym_frame));
      if (cfg_.fec_enabled) last.ssids->hi = asym_ssid;
    } else {
      PendingPacket pp;
      if (cfg_.fec_enabled) pp.ssids = PnRange{asym_ssid, asym_ssid};
      pp.frames.push_back(std::move(asym_frame));
      pending.push_back(std::move(pp));
    }
  }
  for (auto& pp : pending) {
    emit_mc_data_packet(std::move(pp.frames), true, pp.ssids, false, now);
  }
}

void Server::emit_mc_data_packet(std::vector<Frame> frames, bool reliable,
                                 std::optional<PnRange> ssids, bool is_repair,
                                 int64_t now) {
  uint64_t pn = next_pn_mc_data_++;
  Bytes sealed =
      build_sealed_packet(group_keys_, {PathKind::McData, mc_data_cid_, pn},
                          frames);
  Bytes dgram;
  if (cfg_.auth_type == AuthType::AsymPacket) {
    auto sig = sign_datagram(signing_, as_span(sealed));
    dgram = std::move(sealed);
    dgram.insert(dgram.end(), sig.begin(), sig.end());
  } else {
    dgram = sealed;
  }
  counters_.bytes_mc_data += dgram.size();
  ++counters_.packets_mc_data;
  sent_log_[pn] = SentPacketRecord{pn, now, reliable, ssids, is_repair};
  last_mc_send_ = now;
  Bytes tag_input = cfg_.auth_type == AuthType::SymTag ? dgram : Bytes{};
  outbox_.push_back({PathKind::McData, 0, std::move(dgram)});
  if (cfg_.auth_type == AuthType::SymTag) {
    emit_auth_tags(as_span(tag_input), pn, now);
  }
}

void Server::emit_auth_tags(ByteSpan sealed_data_packet, uint64_t data_pn,
                            int64_t now) {
  (void)now;
  std::vector<McAuthEntry> entries;
  for (const auto& [id, s] : sessions_) {
    if (!s.joined) continue;
    McAuthEntry e;
    e.client_id = id;
    e.tag = compute_sym_tag(s.sym_tag_keys, sealed_data_packet, data_pn);
    entries.push_back(e);
  }
  if (entries.empty()) return;
  size_t plain_budget = cfg_.max_packet_size -
                        header_budget(mc_auth_cid_.size()) - kAeadTagLen;
  size_t frame_overhead = 2 + mc_auth_cid_.size() + 8 + 8;  // type, cid, pn, count
  size_t per_packet = (plain_budget - frame_overhead) / 24;
  assert(per_packet > 0);
  for (size_t i = 0; i < entries.size(); i += per_packet) {
    McAuthFrame f;
    f.channel_id = mc_data_cid_;  // identifies the authenticated path
    f.pn = data_pn;
    size_t end = std::min(entries.size(), i + per_packet);
    f.signatures.assign(entries.begin() + i, entries.begin() + end);
    uint64_t pn = next_pn_mc_auth_++;
    Bytes dgram = build_sealed_packet(
        group_keys_, {PathKind::McAuth, mc_auth_cid_, pn}, {Frame{f}});
    counters_.bytes_mc_auth += dgram.size();
    outbox_.push_back({PathKind::McAuth, 0, std::move(dgram)});
  }
}

void Server::on_datagram(uint64_t from_client, ByteSpan dgram, int64_t now) {
  auto it = sessions_.find(from_client);
  if (it == sessions_.end()) return;
  auto in = it->second.uc->on_datagram(dgram, now);
  if (!in.ok) return;
  for (const auto& f : in.frames) {
    if (const auto* st = std::get_if<McStateFrame>(&f)) {
      handle_state(it->second, *st, now);
    } else if (const auto* nk = std::get_if<McNackFrame>(&f)) {
      handle_nack(it->second, *nk, now);
    }
    // Clients send no stream data in this artifact.
  }
  flush_session(it->second, now);
}

void Server::handle_state(Session& s, const McStateFrame& f, int64_t now) {
  if (f.action == uint64_t(McAction::Join)) {
    if (!s.announced) {
      ++counters_.protocol_violations;  // join before announce
      return;
    }
    s.joined = true;
    if (!s.key_sent) {
      s.key_sent = true;
      McKeyFrame key;
      key.channel_id = mc_data_cid_;
      key.key_secret = Bytes(group_secret_.begin(), group_secret_.end());
      key.first_pn = next_pn_mc_data_;
      key.client_id = s.client_id;
      s.uc->queue_control(Frame{key}, true);
    }
  } else if (f.action == uint64_t(McAction::Leave)) {
    if (!s.joined) return;
    s.joined = false;
    s.key_sent = false;  // a rejoin needs a fresh first_pn
    // Streams the leaving client may still need move to its unicast
    // path; the client deduplicates anything it already delivered.
    for (const auto& [id, info] : streams_) {
      if (id >= f.action_data && info.on_mc) enqueue_stream_uc(s, id);
    }
  } else {
    ++counters_.protocol_violations;
  }
  (void)now;
}

void Server::handle_nack(Session& s, const McNackFrame& f, int64_t now) {
  (void)s;
  (void)now;
  ++counters_.nacks_received;
  auto res = scheduler_.on_nack(f.ranges, f.p_max, sent_log_);
  counters_.unknown_nack_pns += res.unknown_pns;
}

void Server::inject_nack(const PnRangeSet& ranges, uint64_t p_max) {
  ++counters_.nacks_received;
  auto res = scheduler_.on_nack(ranges, p_max, sent_log_);
  counters_.unknown_nack_pns += res.unknown_pns;
}

void Server::tick(int64_t now) {
  expire_tick(now);
  for (auto& [id, s] : sessions_) {
    std::vector<Bytes> dgrams;
    auto provider = [this](uint64_t stream_id) -> ByteSpan {
      return as_span(streams_.at(stream_id).data);
    };
    s.uc->tick(now, provider, dgrams);
    for (auto& d : dgrams) {
      counters_.bytes_uc += d.size();
      outbox_.push_back({PathKind::Unicast, id, std::move(d)});
    }
  }
  repair_round(now);
  if (joined_count() > 0 && cfg_.ping_interval_ms > 0 &&
      now - last_mc_send_ >= ms_to_ns(cfg_.ping_interval_ms)) {
    emit_mc_data_packet({Frame{PingFrame{}}}, false, std::nullopt, false, now);
  }
}

void Server::expire_tick(int64_t now) {
  if (now - last_expire_trigger_ < ms_to_ns(cfg_.et_ms)) return;
  int64_t cutoff = last_expire_trigger_;
  prev_expire_trigger_ = last_expire_trigger_;
  last_expire_trigger_ = now;

  bool advanced = false;
  // Packets sent before the previous trigger leave the sending state.
  std::optional<uint64_t> exp_pn;
  std::optional<uint64_t> exp_ssid;
  auto it = sent_log_.begin();
  while (it != sent_log_.end() && it->second.time_sent_ns < cutoff) {
    exp_pn = it->first;
    if (it->second.ssids) exp_ssid = it->second.ssids->hi;
    it = sent_log_.erase(it);
  }
  if (exp_pn && (!exp_pn_floor_ || *exp_pn > *exp_pn_floor_)) {
    exp_pn_floor_ = exp_pn;
    advanced = true;
  }
  if (exp_ssid && (!exp_ssid_floor_ || *exp_ssid > *exp_ssid_floor_)) {
    exp_ssid_floor_ = exp_ssid;
    advanced = true;
  }
  // Streams opened before the previous trigger are reset.
  std::optional<uint64_t> exp_stream;
  for (const auto& [id, info] : streams_) {
    if (info.on_mc && info.open_time < cutoff) {
      if (!exp_stream || id > *exp_stream) exp_stream = id;
    }
  }
  if (exp_stream && (!exp_stream_floor_ || *exp_stream > *exp_stream_floor_)) {
    exp_stream_floor_ = exp_stream;
    advanced = true;
  }
  if (exp_ssid_floor_) window_.expire_up_to(*exp_ssid_floor_);
  if (exp_pn_floor_) scheduler_.expire_up_to(*exp_pn_floor_);

  if ((advanced || cfg_.emit_empty_expire) && joined_count() > 0) {
    McExpireFrame f;
    f.channel_id = mc_data_cid_;
    if (exp_pn_floor_) {
      f.exp_type |= kExpirePn;
      f.pn = *exp_pn_floor_;
    }
    if (exp_stream_floor_) {
      f.exp_type |= kExpireStream;
      f.stream_id = *exp_stream_floor_;
    }
    if (exp_ssid_floor_) {
      f.exp_type |= kExpireFec;
      f.fec_metadata = *exp_ssid_floor_;
    }
    if (f.exp_type != 0 || cfg_.emit_empty_expire) {
      emit_mc_data_packet({Frame{f}}, false, std::nullopt, false, now);
      ++counters_.expire_frames_sent;
    }
  }
}

void Server::repair_round(int64_t now) {
  scheduler_.begin_round();
  while (scheduler_.should_send_repair() && !window_.empty()) {
    std::pair<uint64_t, size_t> snapshot{window_.first_ssid(), window_.size()};
    if (snapshot != last_repair_snapshot_) {
      last_repair_snapshot_ = snapshot;
      next_repair_index_ = 0;
    }
    auto rs = generate_repair(window_, next_repair_index_);
    if (!rs) break;  // repair capacity for this snapshot exhausted
    ++next_repair_index_;
    RepairFrame rf;
    rf.first_ssid = rs->first_ssid;
    rf.window_count = rs->window_count;
    rf.repair_index = rs->repair_index;
    rf.payload = std::move(rs->payload);
    uint64_t pn = next_pn_mc_data_;
    emit_mc_data_packet({Frame{std::move(rf)}}, false, std::nullopt, true,
                        now);
    scheduler_.on_repair_sent(pn, now);
    ++counters_.repairs_sent;
  }
}

std::vector<OutDatagram> Server::take_outbox() {
  std::vector<OutDatagram> out;
  out.swap(outbox_);
  return out;
}

// ---------------------------------------------------------------------------
// Client

Client::Client(EndpointConfig cfg, uint64_t seed, bool supports_mc)
    : cfg_(cfg), rng_(seed), supports_mc_(supports_mc) {}

void Client::install_session(const HandshakeResult& hs) {
  client_id_ = hs.client_id;
  AeadKeys tx = derive_unicast_keys(
      ByteSpan{hs.uc_secret.data(), hs.uc_secret.size()}, false);
  AeadKeys rx = derive_unicast_keys(
      ByteSpan{hs.uc_secret.data(), hs.uc_secret.size()}, true);
  sym_tag_keys_ = rx;
  uc_ = std::make_unique<UcTransport>(&cfg_, hs.uc_cid, tx, rx);
}

void Client::join(int64_t now) {
  join_armed_ = true;
  if (announce_seen_ && membership_ == Membership::Unicast) send_join(now);
}

void Client::send_join(int64_t now) {
  McStateFrame f;
  f.channel_id = announce_data_->channel_id;
  f.action = uint64_t(McAction::Join);
  uc_->queue_control(Frame{f}, true);
  membership_ = Membership::JoinSent;
  std::vector<Bytes> dgrams;
  uc_->flush(now, {}, dgrams);
  for (auto& d : dgrams) {
    counters_.bytes_uc += d.size();
    counters_.bytes_membership += d.size();
    outbox_.push_back({PathKind::Unicast, 0, std::move(d)});
  }
}

uint64_t Client::delivered_need_floor() const {
  if (delivered_ids_.empty() || delivered_ids_.min() > 0) return 0;
  return delivered_ids_.ranges().front().hi + 1;
}

void Client::leave(int64_t now) {
  if (membership_ != Membership::Joined &&
      membership_ != Membership::JoinSent) {
    return;
  }
  McStateFrame f;
  f.channel_id = announce_data_ ? announce_data_->channel_id : Bytes{0};
  f.action = uint64_t(McAction::Leave);
  f.action_data = delivered_need_floor();
  uc_->queue_control(Frame{f}, true, kLeaveMarker);
  membership_ = Membership::LeaveSent;  // stops listening immediately
  join_armed_ = false;

  // Partially received multicast streams will be re-sent whole on the
  // unicast path; stale fragments would only confuse reassembly, and
  // the unicast copy needs no per-stream signature.
  for (auto it = mc_streams_seen_.begin(); it != mc_streams_seen_.end();) {
    if (!delivered_ids_.contains(*it)) {
      reassembly_.erase(*it);
      stream_signatures_.erase(*it);
      it = mc_streams_seen_.erase(it);
    } else {
      ++it;
    }
  }
  symbols_.clear();
  symbol_set_ = {};
  repairs_.clear();
  ssid_stream_.clear();
  pending_asym_by_ssid_.clear();
  auth_buffer_.clear();
  pending_tags_.clear();
  prekey_buffer_.clear();

  DeliveryEvent ev;
  ev.kind = DeliveryEvent::Kind::LeftGroup;
  ev.time_ns = now;
  events_.push_back(std::move(ev));

  std::vector<Bytes> dgrams;
  uc_->flush(now, {}, dgrams);
  for (auto& d : dgrams) {
    counters_.bytes_uc += d.size();
    counters_.bytes_membership += d.size();
    outbox_.push_back({PathKind::Unicast, 0, std::move(d)});
  }
}

void Client::on_datagram(PathKind path, ByteSpan dgram, int64_t now) {
  switch (path) {
    case PathKind::Unicast: {
      auto in = uc_->on_datagram(dgram, now);
      if (!in.ok) {
        ++counters_.malformed_packets;
        return;
      }
      for (uint32_t m : in.acked_markers) {
        if (m == kLeaveMarker && membership_ == Membership::LeaveSent) {
          membership_ = Membership::Unicast;
        }
      }
      handle_uc_frames(in.frames, now);
      break;
    }
    case PathKind::McData:
      if (!listening()) return;
      on_mc_data(dgram, now);
      break;
    case PathKind::McAuth:
      if (!listening()) return;
      on_mc_auth(dgram, now);
      break;
  }
  std::vector<Bytes> dgrams;
  uc_->flush(now, {}, dgrams);
  for (auto& d : dgrams) {
    counters_.bytes_uc += d.size();
    outbox_.push_back({PathKind::Unicast, 0, std::move(d)});
  }
}

void Client::handle_uc_frames(std::vector<Frame>& frames, int64_t now) {
  for (auto& f : frames) {
    if (const auto* ann = std::get_if<McAnnounceFrame>(&f)) {
      handle_announce(*ann, now);
    } else if (const auto* key = std::get_if<McKeyFrame>(&f)) {
      handle_key(*key, now);
    } else if (const auto* sf = std::get_if<StreamFrame>(&f)) {
      handle_stream_frame(*sf, /*mc_path=*/false, now);
    }
  }
}

void Client::handle_announce(const McAnnounceFrame& f, int64_t now) {
  if (f.path_type == McPathType::Data) {
    announce_data_ = f;
    announce_seen_ = true;
    if (join_armed_ && membership_ == Membership::Unicast) send_join(now);
  } else {
    announce_auth_ = f;
  }
}

void Client::handle_key(const McKeyFrame& f, int64_t now) {
  group_keys_ = derive_group_keys(as_span(f.key_secret));
  first_pn_ = f.first_pn;
  if (membership_ == Membership::JoinSent) {
    membership_ = Membership::Joined;
    DeliveryEvent ev;
    ev.kind = DeliveryEvent::Kind::JoinedGroup;
    ev.time_ns = now;
    events_.push_back(std::move(ev));
  }
  auto buffered = std::move(prekey_buffer_);
  prekey_buffer_.clear();
  for (auto& [path, bytes] : buffered) {
    if (path == PathKind::McData) {
      on_mc_data(as_span(bytes), now);
    } else {
      on_mc_auth(as_span(bytes), now);
    }
  }
}

void Client::emit_auth_failure(uint64_t pn, int64_t now) {
  ++counters_.auth_failures;
  DeliveryEvent ev;
  ev.kind = DeliveryEvent::Kind::AuthFailure;
  ev.time_ns = now;
  ev.pn = pn;
  events_.push_back(std::move(ev));
}

void Client::on_mc_data(ByteSpan dgram, int64_t now) {
  ++counters_.mc_data_packets;
  ByteSpan packet = dgram;
  ByteSpan signature;
  if (cfg_.auth_type == AuthType::AsymPacket) {
    if (dgram.size() <= kSignatureLen) {
      ++counters_.malformed_packets;
      return;
    }
    packet = dgram.subspan(0, dgram.size() - kSignatureLen);
    signature = dgram.subspan(dgram.size() - kSignatureLen);
  }
  ByteReader r{packet};
  auto hdr = decode_header(r);
  if (!hdr || hdr->path != PathKind::McData) {
    ++counters_.malformed_packets;
    return;
  }
  if (!group_keys_) {
    if (prekey_buffer_.size() < kPrekeyBufferCap) {
      prekey_buffer_.emplace_back(PathKind::McData, to_bytes(dgram));
    }
    return;
  }
  uint64_t pn = hdr->packet_number;
  if (pn < first_pn_) return;  // predates this membership
  if (exp_pn_floor_ && pn <= *exp_pn_floor_) return;

  if (cfg_.auth_type == AuthType::SymTag) {
    // Withhold until the matching MC_AUTH tag verifies. The packet
    // still counts as received: its content is in hand, not lost.
    received_.insert(pn);
    if (auth_buffer_.size() >= cfg_.auth_buffer_cap) {
      auto oldest = auth_buffer_.begin();
      emit_auth_failure(oldest->first, now);
      auth_buffer_.erase(oldest);
    }
    auth_buffer_[pn] = to_bytes(dgram);
    if (pending_tags_.count(pn)) verify_buffered_sym_tag(pn, now);
    return;
  }
  if (cfg_.auth_type == AuthType::AsymPacket) {
    if (!announce_data_ ||
        !verify_datagram(as_span(announce_data_->pub_key), packet,
                         signature)) {
      emit_auth_failure(pn, now);
      return;  // not recorded as received: FEC can still recover it
    }
  }
  ByteSpan hdr_bytes = packet.subspan(0, r.pos());
  auto plain = open_packet(*group_keys_, hdr_bytes, packet.subspan(r.pos()),
                           pn, PathKind::McData);
  if (!plain) {
    emit_auth_failure(pn, now);
    return;
  }
  received_.insert(pn);
  process_mc_plaintext(pn, as_span(*plain), now);
}

void Client::on_mc_auth(ByteSpan dgram, int64_t now) {
  ByteReader r{dgram};
  auto hdr = decode_header(r);
  if (!hdr || hdr->path != PathKind::McAuth) {
    ++counters_.malformed_packets;
    return;
  }
  if (!group_keys_) {
    if (prekey_buffer_.size() < kPrekeyBufferCap) {
      prekey_buffer_.emplace_back(PathKind::McAuth, to_bytes(dgram));
    }
    return;
  }
  ByteSpan hdr_bytes = dgram.subspan(0, r.pos());
  auto plain = open_packet(*group_keys_, hdr_bytes, dgram.subspan(r.pos()),
                           hdr->packet_number, PathKind::McAuth);
  if (!plain) {
    emit_auth_failure(hdr->packet_number, now);
    return;
  }
  auto frames = parse_packet_payload(as_span(*plain));
  if (!frames) {
    ++counters_.malformed_packets;
    return;
  }
  for (const auto& f : *frames) {
    const auto* auth = std::get_if<McAuthFrame>(&f);
    if (!auth) continue;
    for (const auto& e : auth->signatures) {
      if (e.client_id != client_id_) continue;
      pending_tags_[auth->pn] = e.tag;
      if (auth_buffer_.count(auth->pn)) verify_buffered_sym_tag(auth->pn, now);
    }
  }
}

void Client::verify_buffered_sym_tag(uint64_t pn, int64_t now) {
  auto buf_it = auth_buffer_.find(pn);
  auto tag_it = pending_tags_.find(pn);
  if (buf_it == auth_buffer_.end() || tag_it == pending_tags_.end()) return;
  Bytes sealed = std::move(buf_it->second);
  auto expected = tag_it->second;
  auth_buffer_.erase(buf_it);
  pending_tags_.erase(tag_it);
  auto actual = compute_sym_tag(sym_tag_keys_, as_span(sealed), pn);
  if (actual != expected) {
    emit_auth_failure(pn, now);
    return;
  }
  ByteReader r{as_span(sealed)};
  auto hdr = decode_header(r);
  if (!hdr) return;
  ByteSpan hdr_bytes = ByteSpan{sealed.data(), r.pos()};
  auto plain = open_packet(*group_keys_, hdr_bytes,
                           ByteSpan{sealed.data() + r.pos(),
                                    sealed.size() - r.pos()},
                           pn, PathKind::McData);
  if (!plain) {
    emit_auth_failure(pn, now);
    return;
  }
  process_mc_plaintext(pn, as_span(*plain), now);
}

void Client::process_mc_plaintext(uint64_t pn, ByteSpan plain, int64_t now) {
  auto frames = parse_packet_payload(plain);
  if (!frames) {
    ++counters_.malformed_packets;
    return;
  }
  PacketMeta meta;
  for (const auto& f : *frames) {
    if (const auto* ss = std::get_if<SourceSymbolFrame>(&f)) {
      if (!meta.has_ssids) {
        meta.has_ssids = true;
        meta.ssid_lo = ss->ssid;
        meta.ssid_hi = ss->ssid;
      } else {
        meta.ssid_lo = std::min(meta.ssid_lo, ss->ssid);
        meta.ssid_hi = std::max(meta.ssid_hi, ss->ssid);
      }
    }
  }
  received_meta_[pn] = meta;
  uint64_t last_stream_in_packet = UINT64_MAX;
  for (const auto& f : *frames) {
    process_mc_frame(f, pn, now, &last_stream_in_packet);
  }
  try_recover(now);
}

void Client::process_mc_frame(const Frame& f, uint64_t pn, int64_t now,
                              uint64_t* last_stream_in_packet) {
  if (std::holds_alternative<PingFrame>(f)) return;
  if (const auto* ss = std::get_if<SourceSymbolFrame>(&f)) {
    accept_symbol(ss->ssid, as_span(ss->inner), pn, now);
    return;
  }
  if (const auto* sf = std::get_if<StreamFrame>(&f)) {
    *last_stream_in_packet = sf->stream_id;
    handle_stream_frame(*sf, /*mc_path=*/true, now);
    return;
  }
  if (const auto* ma = std::get_if<McAsymFrame>(&f)) {
    // Unprotected MC_ASYM binds to the preceding STREAM frame in the
    // same packet (the FEC-mapped variant arrives as a symbol instead).
    if (*last_stream_in_packet != UINT64_MAX) {
      handle_asym_signature(*last_stream_in_packet, ma->signature, now);
    }
    return;
  }
  if (const auto* rp = std::get_if<RepairFrame>(&f)) {
    if (exp_ssid_floor_ &&
        rp->first_ssid + rp->window_count <= *exp_ssid_floor_ + 1) {
      return;  // covers only expired symbols
    }
    RepairSymbol rs;
    rs.first_ssid = rp->first_ssid;
    rs.window_count = rp->window_count;
    rs.repair_index = rp->repair_index;
    rs.payload = rp->payload;
    repairs_.push_back(std::move(rs));
    return;
  }
  if (const auto* ex = std::get_if<McExpireFrame>(&f)) {
    handle_expire(*ex, now);
    return;
  }
}

void Client::accept_symbol(uint64_t ssid, ByteSpan frame_bytes, uint64_t pn,
                           int64_t now) {
  (void)pn;
  if (exp_ssid_floor_ && ssid <= *exp_ssid_floor_) return;
  if (symbols_.count(ssid)) return;
  symbols_[ssid] = to_bytes(frame_bytes);
  symbol_set_.insert(ssid);
  auto dec = decode_frame(frame_bytes);
  if (!dec) {
    ++counters_.malformed_packets;
    return;
  }
  if (const auto* sf = std::get_if<StreamFrame>(&dec->frame)) {
    ssid_stream_[ssid] = sf->stream_id;
    handle_stream_frame(*sf, /*mc_path=*/true, now);
    // An MC_ASYM symbol at ssid+1 may have been waiting for this
    // stream association.
    auto pending = pending_asym_by_ssid_.find(ssid + 1);
    if (pending != pending_asym_by_ssid_.end()) {
      Bytes sig = std::move(pending->second);
      pending_asym_by_ssid_.erase(pending);
      handle_asym_signature(sf->stream_id, std::move(sig), now);
    }
    return;
  }
  if (const auto* ma = std::get_if<McAsymFrame>(&dec->frame)) {
    auto prev = ssid_stream_.find(ssid - 1);
    if (prev != ssid_stream_.end()) {
      handle_asym_signature(prev->second, ma->signature, now);
    } else if (ssid > 0) {
      pending_asym_by_ssid_[ssid] = ma->signature;
    }
    return;
  }
}

bool Client::Reassembly::complete() const {
  if (!fin_len) return false;
  uint64_t covered = 0;
  for (const auto& [off, bytes] : segments) {
    if (off > covered) return false;
    covered = std::max(covered, off + bytes.size());
  }
  return covered >= *fin_len;
}

Bytes Client::Reassembly::assemble() const {
  Bytes out(*fin_len, 0);
  for (const auto& [off, bytes] : segments) {
    size_t n = std::min<size_t>(bytes.size(), out.size() - off);
    std::copy(bytes.begin(), bytes.begin() + n, out.begin() + off);
  }
  return out;
}

void Client::handle_stream_frame(const StreamFrame& f, bool mc_path,
                                 int64_t now) {
  if (delivered_ids_.contains(f.stream_id)) return;
  if (mc_path && exp_stream_floor_ && f.stream_id <= *exp_stream_floor_) {
    return;  // already reset by expiration
  }
  if (mc_path) mc_streams_seen_.insert(f.stream_id);
  auto& rea = reassembly_[f.stream_id];
  if (f.fin) rea.fin_len = f.offset + f.data.size();
  rea.segments[f.offset] = f.data;
  try_complete_stream(f.stream_id, now);
}

void Client::handle_asym_signature(uint64_t stream_id, Bytes sig,
                                   int64_t now) {
  stream_signatures_[stream_id] = std::move(sig);
  try_complete_stream(stream_id, now);
}

void Client::try_complete_stream(uint64_t stream_id, int64_t now) {
  if (delivered_ids_.contains(stream_id)) return;
  auto it = reassembly_.find(stream_id);
  if (it == reassembly_.end() || !it->second.complete()) return;
  bool via_mc = mc_streams_seen_.count(stream_id) > 0;
  Bytes data = it->second.assemble();
  bool authenticated = true;
  if (via_mc && cfg_.auth_type == AuthType::AsymStream) {
    auto sig = stream_signatures_.find(stream_id);
    if (sig == stream_signatures_.end()) return;  // await MC_ASYM
    if (!announce_data_ ||
        !verify_stream(as_span(announce_data_->pub_key), stream_id,
                       as_span(data), as_span(sig->second))) {
      emit_auth_failure(0, now);
      reassembly_.erase(it);
      stream_signatures_.erase(stream_id);
      return;  // whole stream discarded
    }
  } else if (via_mc && cfg_.auth_type == AuthType::None) {
    authenticated = false;
  }
  reassembly_.erase(it);
  stream_signatures_.erase(stream_id);
  delivered_ids_.insert(stream_id);
  counters_.delivered_bytes += data.size();
  ++counters_.delivered_streams;
  DeliveryEvent ev;
  ev.kind = DeliveryEvent::Kind::StreamData;
  ev.time_ns = now;
  ev.stream_id = stream_id;
  ev.authenticated = authenticated;
  ev.data = std::move(data);
  events_.push_back(std::move(ev));
}

void Client::handle_expire(const McExpireFrame& f, int64_t now) {
  if (f.exp_type & kExpirePn) {
    if (!exp_pn_floor_ || f.pn > *exp_pn_floor_) {
      exp_pn_floor_ = f.pn;
      received_meta_.erase(received_meta_.begin(),
                           received_meta_.upper_bound(f.pn));
      // Buffered-but-unverified packets at or below the floor are
      // discarded without an AuthFailure.
      auth_buffer_.erase(auth_buffer_.begin(),
                         auth_buffer_.upper_bound(f.pn));
      pending_tags_.erase(pending_tags_.begin(),
                          pending_tags_.upper_bound(f.pn));
    }
  }
  if (f.exp_type & kExpireStream) {
    if (!exp_stream_floor_ || f.stream_id > *exp_stream_floor_) {
      exp_stream_floor_ = f.stream_id;
      std::vector<uint64_t> to_reset;
      for (const auto& [id, rea] : reassembly_) {
        if (id <= f.stream_id && mc_streams_seen_.count(id) &&
            !delivered_ids_.contains(id)) {
          to_reset.push_back(id);
        }
      }
      for (uint64_t id : to_reset) {
        reassembly_.erase(id);
        stream_signatures_.erase(id);
        ++counters_.reset_streams;
        DeliveryEvent ev;
        ev.kind = DeliveryEvent::Kind::StreamReset;
        ev.time_ns = now;
        ev.stream_id = id;
        events_.push_back(std::move(ev));
      }
    }
  }
  if (f.exp_type & kExpireFec) {
    if (!exp_ssid_floor_ || f.fec_metadata > *exp_ssid_floor_) {
      exp_ssid_floor_ = f.fec_metadata;
      symbols_.erase(symbols_.begin(),
                     symbols_.upper_bound(f.fec_metadata));
      symbol_set_.erase_up_to(f.fec_metadata);
      ssid_stream_.erase(ssid_stream_.begin(),
                         ssid_stream_.upper_bound(f.fec_metadata));
      pending_asym_by_ssid_.erase(
          pending_asym_by_ssid_.begin(),
          pending_asym_by_ssid_.upper_bound(f.fec_metadata));
      std::erase_if(repairs_, [&](const RepairSymbol& r) {
        return r.first_ssid + r.window_count <= f.fec_metadata + 1;
      });
    }
  }
}

void Client::try_recover(int64_t now) {
  if (repairs_.empty()) return;
  auto has_missing = [&](const RepairSymbol& r) {
    for (uint64_t s = r.first_ssid; s < r.first_ssid + r.window_count; ++s) {
      if (exp_ssid_floor_ && s <= *exp_ssid_floor_) continue;
      if (!symbols_.count(s)) return true;
    }
    return false;
  };
  std::erase_if(repairs_, [&](const RepairSymbol& r) { return !has_missing(r); });
  if (repairs_.empty()) return;
  auto solved = recover(symbols_, repairs_);
  if (solved.empty()) return;
  for (auto& s : solved) {
    ++counters_.recovered_symbols;
    uint64_t ssid = s.ssid;
    Bytes payload = std::move(s.payload);
    // accept_symbol re-checks duplicates and parses the frame.
    symbols_.erase(ssid);  // recover() result wins over nothing
    accept_symbol(ssid, as_span(payload), 0, now);
  }
  std::erase_if(repairs_, [&](const RepairSymbol& r) { return !has_missing(r); });
}

uint64_t Client::nack_floor() const {
  uint64_t floor = first_pn_;
  if (exp_pn_floor_) floor = std::max(floor, *exp_pn_floor_ + 1);
  return floor;
}

PnRangeSet Client::needed_gaps() const {
  PnRangeSet out;
  if (received_.empty()) return out;
  uint64_t p_max = received_.max();
  uint64_t floor = nack_floor();
  PnRangeSet raw = received_.gaps_within(floor, p_max);
  for (const auto& gap : raw.ranges()) {
    // SSID bounds from the nearest symbol-bearing packets around the
    // gap tell whether its reliable content is already in hand.
    std::optional<uint64_t> below;
    {
      auto it = received_meta_.lower_bound(gap.lo);
      while (it != received_meta_.begin()) {
        --it;
        if (it->second.has_ssids) {
          below = it->second.ssid_hi;
          break;
        }
      }
    }
    if (!below && exp_ssid_floor_) below = *exp_ssid_floor_;
    std::optional<uint64_t> above;
    for (auto it = received_meta_.upper_bound(gap.hi);
         it != received_meta_.end(); ++it) {
      if (it->second.has_ssids) {
        above = it->second.ssid_lo;
        break;
      }
    }
    if (below && above) {
      uint64_t lo = *below + 1;
      uint64_t hi = *above == 0 ? 0 : *above - 1;
      if (exp_ssid_floor_) lo = std::max(lo, *exp_ssid_floor_ + 1);
      if (lo > hi) continue;  // gap carried no still-needed symbols
      if (symbol_set_.gaps_within(lo, hi).empty()) continue;  // recovered
    }
    out.insert_range(gap.lo, gap.hi);
  }
  return out;
}

void Client::maybe_send_nack(int64_t now) {
  if (membership_ != Membership::Joined) return;
  if (now - last_nack_ < ms_to_ns(cfg_.nack_delay_ms)) return;
  PnRangeSet gaps = needed_gaps();
  if (gaps.empty()) return;
  McNackFrame f;
  f.channel_id = announce_data_->channel_id;
  f.p_max = received_.max();
  if (gaps.size() > kMaxAckRanges) {
    // Oldest losses are the most urgent; the rest follow next round.
    for (size_t i = 0; i < kMaxAckRanges; ++i) {
      f.ranges.insert_range(gaps.ranges()[i].lo, gaps.ranges()[i].hi);
    }
  } else {
    f.ranges = gaps;
  }
  if (!symbol_set_.empty()) {
    uint64_t lo = exp_ssid_floor_ ? *exp_ssid_floor_ + 1 : symbol_set_.min();
    f.fec_nack = symbol_set_.gaps_within(lo, symbol_set_.max());
  }
  uc_->queue_control(Frame{f}, /*retransmittable=*/false);
  last_nack_ = now;
  ++counters_.nacks_sent;
}

void Client::tick(int64_t now) {
  maybe_send_nack(now);
  if (!uc_) return;
  std::vector<Bytes> dgrams;
  uc_->tick(now, {}, dgrams);
  for (auto& d : dgrams) {
    counters_.bytes_uc += d.size();
    outbox_.push_back({PathKind::Unicast, 0, std::move(d)});
  }
}

std::vector<OutDatagram> Client::take_outbox() {
  std::vector<OutDatagram> out;
  out.swap(outbox_);
  return out;
}

std::vector<DeliveryEvent> Client::take_events() {
  std::vector<DeliveryEvent> out;
  out.swap(events_);
  return out;
}

}  // namespace mcquic
