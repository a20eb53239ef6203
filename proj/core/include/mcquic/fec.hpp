#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "mcquic/bytes.hpp"
#include "mcquic/wire.hpp"

namespace mcquic {

// GF(256) Vandermonde coding caps the protected set: a window of k
// symbols leaves 255 - k distinct repair rows.
inline constexpr size_t kFecCapacity = 255;

struct SourceSymbol {
  uint64_t ssid = 0;
  Bytes payload;  // the encoded protected frame
  auto operator<=>(const SourceSymbol&) const = default;
};

/// Systematic code: rows k..k+r-1 of the row-reduced (k+r) x k
/// Vandermonde matrix on distinct evaluation points, so the first k
/// rows are the identity and any k rows of the whole matrix stay
/// linearly independent. Returns the r repair rows.
/// Throws std::invalid_argument when k + r > kFecCapacity or k == 0.
std::vector<std::vector<uint8_t>> build_systematic_vandermonde(size_t k,
                                                               size_t r);

/// Coefficient row for a single repair; cached per (k, repair_index).
const std::vector<uint8_t>& repair_coefficients(size_t k,
                                                size_t repair_index);

struct RepairSymbol {
  uint64_t first_ssid = 0;
  uint64_t window_count = 0;
  uint64_t repair_index = 0;
  Bytes payload;  // 2-byte length prefix convention, see generate_repair
  auto operator<=>(const RepairSymbol&) const = default;
};

/// Sliding window of contiguous, unexpired source symbols.
class FecWindow {
 public:
  explicit FecWindow(size_t max_window) : max_window_(max_window) {}

  bool empty() const { return symbols_.empty(); }
  bool full() const { return symbols_.size() >= max_window_; }
  size_t size() const { return symbols_.size(); }
  size_t max_window() const { return max_window_; }
  uint64_t first_ssid() const { return first_ssid_; }
  uint64_t next_ssid() const { return first_ssid_ + symbols_.size(); }

  /// Assigns the next SSID and appends; nullopt when full.
  std::optional<uint64_t> map_frame(ByteSpan frame_bytes);

  /// Drops symbols with ssid <= up_to_ssid and advances first_ssid.
  void expire_up_to(uint64_t up_to_ssid);

  const Bytes& symbol(uint64_t ssid) const;

 private:
  uint64_t first_ssid_ = 0;
  std::deque<Bytes> symbols_;
  size_t max_window_;
};

/// Linear combination of the whole current window under the
/// (window_count, repair_index) coefficient row. Each source payload is
/// 2-byte-length-prefixed and zero-padded to the window-wide width.
/// nullopt when the window is empty or repair_index exhausts the
/// GF(256) capacity (window_count + repair_index >= kFecCapacity).
std::optional<RepairSymbol> generate_repair(const FecWindow& window,
                                            uint64_t repair_index);

/// Solves for missing symbols. `received` maps ssid -> payload for the
/// symbols already on hand; each repair contributes one equation over
/// the unknowns of its own window. Repairs sharing a window snapshot
/// are solved jointly by Gaussian elimination; solved symbols feed back
/// into other snapshots until a fixpoint. Returns newly solved symbols,
/// lengths restored from the 2-byte prefix. Inconsistent equations
/// (corrupt repairs) never produce a symbol.
std::vector<SourceSymbol> recover(const std::map<uint64_t, Bytes>& received,
                                  const std::vector<RepairSymbol>& repairs);

struct SentPacketRecord {
  uint64_t pn = 0;
  int64_t time_sent_ns = 0;
  bool carries_reliable = false;       // holds >= 1 FEC-protected frame
  std::optional<PnRange> ssids;        // ssid range carried, if any
  bool is_repair = false;
};

using SentLog = std::map<uint64_t, SentPacketRecord>;

/// Repair scheduling state driven by MC_NACK feedback: nb_to_send
/// accumulates demand, sent_repairs remembers which repair packets a
/// NACK's p_max could not yet have seen.
class RepairScheduler {
 public:
  RepairScheduler(uint64_t max_nb_repair, bool literal)
      : max_nb_repair_(max_nb_repair), literal_(literal) {}

  struct NackResult {
    uint64_t reliable_lost = 0;   // n
    uint64_t repairs_unseen = 0;  // n_repairs
    uint64_t unknown_pns = 0;     // NACKed PNs absent from the sent log
  };

  NackResult on_nack(const PnRangeSet& ranges, uint64_t p_max,
                     const SentLog& sent_log);

  void begin_round() { sent_this_round_ = 0; }
  bool should_send_repair() const {
    return nb_to_send_ > 0 && sent_this_round_ < max_nb_repair_;
  }
  void on_repair_sent(uint64_t pn, int64_t now_ns);

  /// Drops sent_repairs entries with pn <= up_to_pn.
  void expire_up_to(uint64_t up_to_pn);

  uint64_t nb_to_send() const { return nb_to_send_; }
  uint64_t sent_this_round() const { return sent_this_round_; }
  size_t sent_repairs_size() const { return sent_repairs_.size(); }

 private:
  uint64_t nb_to_send_ = 0;
  uint64_t sent_this_round_ = 0;
  std::vector<std::pair<uint64_t, int64_t>> sent_repairs_;  // (pn, time)
  uint64_t max_nb_repair_;
  bool literal_;
};

}  // namespace mcquic
