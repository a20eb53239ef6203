#pragma once

#include <functional>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "mcquic/bytes.hpp"
#include "mcquic/wire.hpp"

namespace mcquic {

enum class LossScope { Both, McOnly };

struct LossProfile {
  enum class Kind { None, LeafLinks, SharedTopLink };
  Kind kind = Kind::None;
  double p = 0.0;
};

/// Binary tree rooted next to the source host (node 0). Tree nodes are
/// numbered 1..n heap-style, which fills each layer before opening the
/// next; every tree node is also a client.
class Topology {
 public:
  struct Link {
    int64_t delay_ns = 0;
    uint64_t bandwidth_bps = 0;
    double loss_rate = 0.0;
    LossScope scope = LossScope::Both;
  };

  static Topology binary_tree(size_t n_clients, double link_delay_ms,
                              uint64_t bandwidth_bps);

  size_t client_count() const { return n_; }
  size_t node_count() const { return n_ + 1; }  // incl. source host 0
  int parent(int node) const { return node == 1 ? 0 : node / 2; }
  bool is_leaf(int node) const { return size_t(2 * node) > n_; }
  std::vector<int> leaves() const;

  /// Each tree edge is keyed by its child endpoint.
  Link& link(int child) { return links_.at(size_t(child) - 1); }
  const Link& link(int child) const { return links_.at(size_t(child) - 1); }

  void apply_loss_profile(const LossProfile& profile);

  void set_member(int node, bool joined);
  bool member(int node) const { return members_.count(node) > 0; }
  size_t members_below(int node) const;  // joined members in subtree(node)
  size_t member_count() const { return members_.size(); }

 private:
  size_t n_ = 0;
  std::vector<Link> links_;  // links_[i] joins node i+1 to its parent
  std::set<int> members_;
  std::vector<size_t> subtree_members_;  // indexed by node, 0 = everyone
};

/// Discrete-event simulator: per-link FIFO with serialization plus
/// propagation delay, iid per-datagram loss on designated links, and
/// replication of group datagrams along the tree. Identical seeds and
/// inputs give identical traces; same-time events run in insertion
/// order.
class Simulator {
 public:
  struct LinkStats {
    uint64_t transmissions = 0;
    uint64_t deliveries = 0;  // copies handed to the next hop
    uint64_t drops = 0;
    uint64_t group_bytes = 0;
  };

  // (to_node, from_node, path, bytes, now)
  using DeliverFn =
      std::function<void(int, int, PathKind, ByteSpan, int64_t)>;

  Simulator(Topology topology, uint64_t seed)
      : topo_(std::move(topology)), rng_(seed) {}

  Topology& topology() { return topo_; }
  const Topology& topology() const { return topo_; }

  void set_deliver(DeliverFn fn) { deliver_ = std::move(fn); }

  void send_unicast(int from, int to, PathKind path, Bytes bytes);
  void send_group(PathKind path, Bytes bytes);  // always from node 0

  void schedule_at(int64_t t, std::function<void()> fn);
  void run_until(int64_t t_end);

  int64_t now() const { return now_; }
  const std::map<std::pair<int, int>, LinkStats>& link_stats() const {
    return stats_;
  }

 private:
  struct Event {
    int64_t time;
    uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Event& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  // Returns arrival time at `child`'s far end, or nullopt when dropped.
  std::optional<int64_t> traverse(int from, int to, size_t bytes,
                                  PathKind path, int64_t entry);
  void hop_unicast(int node, int to, int origin, Bytes bytes, PathKind path);
  void replicate_group(int node, Bytes bytes, PathKind path, int64_t t);

  Topology topo_;
  std::mt19937_64 rng_;
  DeliverFn deliver_;
  int64_t now_ = 0;
  uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::map<std::pair<int, int>, int64_t> link_free_;  // (child, dir) keyed
  std::map<std::pair<int, int>, LinkStats> stats_;
};

}  // namespace mcquic
