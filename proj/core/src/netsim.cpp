#include "mcquic/netsim.hpp"

#include <cassert>

namespace mcquic {

Topology Topology::binary_tree(size_t n_clients, double link_delay_ms,
                               uint64_t bandwidth_bps) {
  assert(n_clients >= 1);
  Topology t;
  t.n_ = n_clients;
  Link l;
  l.delay_ns = int64_t(link_delay_ms * 1e6);
  l.bandwidth_bps = bandwidth_bps;
  t.links_.assign(n_clients, l);
  t.subtree_members_.assign(n_clients + 1, 0);
  return t;
}

std::vector<int> Topology::leaves() const {
  std::vector<int> out;
  for (int i = 1; i <= int(n_); ++i) {
    if (is_leaf(i)) out.push_back(i);
  }
  return out;
}

void Topology::apply_loss_profile(const LossProfile& profile) {
  switch (profile.kind) {
    case LossProfile::Kind::None:
      break;
    case LossProfile::Kind::LeafLinks:
      for (int leaf : leaves()) link(leaf).loss_rate = profile.p;
      break;
    case LossProfile::Kind::SharedTopLink:
      // The left link at the second layer of the tree, so one shared
      // loss pattern covers that whole branch.
      if (n_ >= 2) link(2).loss_rate = profile.p;
      break;
  }
}

void Topology::set_member(int node, bool joined) {
  bool present = members_.count(node) > 0;
  if (joined == present) return;
  if (joined) {
    members_.insert(node);
  } else {
    members_.erase(node);
  }
  for (int c = node; ; c = parent(c)) {
    if (joined) {
      ++subtree_members_[size_t(c)];
    } else {
      --subtree_members_[size_t(c)];
    }
    if (c == 0) break;
  }
}

size_t Topology::members_below(int node) const {
  return subtree_members_[size_t(node)];
}

void Simulator::schedule_at(int64_t t, std::function<void()> fn) {
  queue_.push(Event{std::max(t, now_), next_seq_++, std::move(fn)});
}

std::optional<int64_t> Simulator::traverse(int from, int to, size_t bytes,
                                           PathKind path, int64_t entry) {
  int child = topo_.parent(to) == from ? to : from;
  assert(child == to || topo_.parent(from) == to);
  int dir = child == to ? 0 : 1;
  const auto& link = topo_.link(child);
  auto& st = stats_[{child, dir}];
  ++st.transmissions;
  if (link.loss_rate > 0.0 &&
      (link.scope == LossScope::Both || path != PathKind::Unicast)) {
    double draw = double(rng_() >> 11) * 0x1.0p-53;
    if (draw < link.loss_rate) {
      ++st.drops;
      return std::nullopt;
    }
  }
  auto& free_at = link_free_[{child, dir}];
  int64_t start = std::max(entry, free_at);
  int64_t ser =
      int64_t(uint64_t(bytes) * 8 * 1'000'000'000 / link.bandwidth_bps);
  free_at = start + ser;
  ++st.deliveries;
  if (path != PathKind::Unicast) st.group_bytes += bytes;
  return start + ser + link.delay_ns;
}

void Simulator::hop_unicast(int node, int to, int origin, Bytes bytes,
                            PathKind path) {
  if (node == to) {
    if (deliver_) deliver_(to, origin, path, as_span(bytes), now_);
    return;
  }
  // Next hop toward `to`: down when this node is an ancestor, else up.
  int next;
  {
    int c = to;
    int prev = -1;
    while (c != node && c != 0) {
      prev = c;
      c = topo_.parent(c);
    }
    next = c == node ? prev : topo_.parent(node);
  }
  auto arrival = traverse(node, next, bytes.size(), path, now_);
  if (!arrival) return;
  schedule_at(*arrival,
              [this, next, to, origin, b = std::move(bytes), path]() mutable {
                hop_unicast(next, to, origin, std::move(b), path);
              });
}

void Simulator::send_unicast(int from, int to, PathKind path, Bytes bytes) {
  hop_unicast(from, to, from, std::move(bytes), path);
}

void Simulator::replicate_group(int node, Bytes bytes, PathKind path,
                                int64_t t) {
  (void)t;
  if (node != 0 && topo_.member(node) && deliver_) {
    Bytes copy = bytes;
    schedule_at(now_, [this, node, path, b = std::move(copy)]() {
      deliver_(node, 0, path, as_span(b), now_);
    });
  }
  std::vector<int> children;
  if (node == 0) {
    children.push_back(1);
  } else {
    if (size_t(2 * node) <= topo_.client_count()) children.push_back(2 * node);
    if (size_t(2 * node + 1) <= topo_.client_count()) {
      children.push_back(2 * node + 1);
    }
  }
  for (int child : children) {
    if (topo_.members_below(child) == 0) continue;
    auto arrival = traverse(node, child, bytes.size(), path, now_);
    if (!arrival) continue;
    Bytes copy = bytes;
    schedule_at(*arrival, [this, child, path, b = std::move(copy)]() mutable {
      replicate_group(child, std::move(b), path, now_);
    });
  }
}

void Simulator::send_group(PathKind path, Bytes bytes) {
  replicate_group(0, std::move(bytes), path, now_);
}

void Simulator::run_until(int64_t t_end) {
  while (!queue_.empty() && queue_.top().time <= t_end) {
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    now_ = ev.time;
    ev.fn();
  }
  now_ = t_end;
}

}  // namespace mcquic
