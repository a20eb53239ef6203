#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "mcquic/netsim.hpp"

using namespace mcquic;

TEST_CASE("binary tree: single client") {
  auto t = Topology::binary_tree(1, 3.0, 100'000'000);
  CHECK(t.node_count() == 2);
  CHECK(t.parent(1) == 0);
  CHECK(t.is_leaf(1));
  CHECK(t.leaves() == std::vector<int>{1});
}

TEST_CASE("binary tree fills a layer before opening the next") {
  auto t = Topology::binary_tree(3, 3.0, 100'000'000);
  // depth(1) = 0; 2 and 3 complete the next layer before node 4 exists
  CHECK(t.parent(2) == 1);
  CHECK(t.parent(3) == 1);
  CHECK(t.leaves() == std::vector<int>{2, 3});

  auto t7 = Topology::binary_tree(7, 3.0, 100'000'000);
  for (int n = 2; n <= 3; ++n) CHECK(t7.parent(n) == 1);
  for (int n = 4; n <= 7; ++n) CHECK(t7.parent(n) == n / 2);
  CHECK_FALSE(t7.is_leaf(3));
  CHECK(t7.is_leaf(4));
}

TEST_CASE("50-client tree: 6 hops and 18 ms one-way to the deepest leaf") {
  auto t = Topology::binary_tree(50, 3.0, 100'000'000);
  int deepest = 50;
  int hops = 0;
  int64_t delay = 0;
  for (int c = deepest; c != 0; c = t.parent(c)) {
    ++hops;
    delay += t.link(c).delay_ns;
  }
  CHECK(hops == 6);
  CHECK(delay == 18'000'000);
  // 25 internal nodes, 25 leaves
  CHECK(t.leaves().size() == 25);
  CHECK(t.leaves().front() == 26);
}

TEST_CASE("loss profiles hit the designated links") {
  auto t = Topology::binary_tree(50, 3.0, 100'000'000);
  t.apply_loss_profile({LossProfile::Kind::LeafLinks, 0.05});
  for (int leaf : t.leaves()) CHECK(t.link(leaf).loss_rate == 0.05);
  CHECK(t.link(2).loss_rate == 0.0);

  auto t2 = Topology::binary_tree(50, 3.0, 100'000'000);
  t2.apply_loss_profile({LossProfile::Kind::SharedTopLink, 0.05});
  CHECK(t2.link(2).loss_rate == 0.05);
  CHECK(t2.link(3).loss_rate == 0.0);
  for (int leaf : t2.leaves()) CHECK(t2.link(leaf).loss_rate == 0.0);
}

TEST_CASE("serialization plus propagation: 1350 B over 100 Mbps, 3 ms") {
  auto t = Topology::binary_tree(1, 3.0, 100'000'000);
  Simulator sim(std::move(t), 1);
  int64_t arrival = -1;
  sim.set_deliver([&](int node, int from, PathKind, ByteSpan, int64_t now) {
    CHECK(node == 1);
    CHECK(from == 0);
    arrival = now;
  });
  sim.send_unicast(0, 1, PathKind::Unicast, Bytes(1350, 0));
  sim.run_until(10'000'000);
  // 1350*8/1e8 s = 108 us serialization + 3 ms propagation
  CHECK(arrival == 3'108'000);
}

TEST_CASE("FIFO per link: back-to-back packets queue") {
  auto t = Topology::binary_tree(1, 1.0, 10'000'000);  // 10 Mbps
  Simulator sim(std::move(t), 1);
  std::vector<int64_t> arrivals;
  sim.set_deliver([&](int, int, PathKind, ByteSpan, int64_t now) {
    arrivals.push_back(now);
  });
  // 1250 bytes at 10 Mbps = 1 ms serialization each
  sim.send_unicast(0, 1, PathKind::Unicast, Bytes(1250, 0));
  sim.send_unicast(0, 1, PathKind::Unicast, Bytes(1250, 0));
  sim.run_until(100'000'000);
  REQUIRE(arrivals.size() == 2);
  CHECK(arrivals[0] == 2'000'000);  // 1 ms ser + 1 ms prop
  CHECK(arrivals[1] == 3'000'000);  // waited for the first transmission
}

TEST_CASE("group replication: one copy per link, members only") {
  auto t = Topology::binary_tree(7, 1.0, 100'000'000);
  for (int i = 1; i <= 7; ++i) t.set_member(i, true);
  t.set_member(5, false);
  Simulator sim(std::move(t), 1);
  std::set<int> delivered;
  sim.set_deliver([&](int node, int from, PathKind path, ByteSpan, int64_t) {
    CHECK(from == 0);
    CHECK(path == PathKind::McData);
    delivered.insert(node);
  });
  sim.send_group(PathKind::McData, Bytes(500, 1));
  sim.run_until(1'000'000'000);
  CHECK(delivered == std::set<int>{1, 2, 3, 4, 6, 7});
  // exactly one transmission per tree link on the path set
  for (const auto& [key, st] : sim.link_stats()) {
    CHECK(st.transmissions <= 1);
  }
  uint64_t total_tx = 0;
  for (const auto& [key, st] : sim.link_stats()) total_tx += st.transmissions;
  // 0-1, 1-2, 1-3, 2-4, 3-6, 3-7; the 2-5 branch has no members
  CHECK(total_tx == 6);
}

TEST_CASE("no members below: branch pruned") {
  auto t = Topology::binary_tree(7, 1.0, 100'000'000);
  t.set_member(3, true);  // only node 3 joined
  Simulator sim(std::move(t), 1);
  std::set<int> delivered;
  sim.set_deliver([&](int node, int, PathKind, ByteSpan, int64_t) {
    delivered.insert(node);
  });
  sim.send_group(PathKind::McData, Bytes(100, 1));
  sim.run_until(1'000'000'000);
  CHECK(delivered == std::set<int>{3});
  uint64_t total_tx = 0;
  for (const auto& [key, st] : sim.link_stats()) total_tx += st.transmissions;
  CHECK(total_tx == 2);  // 0->1, 1->3 only
}

TEST_CASE("empirical loss rate tracks the configured probability") {
  auto t = Topology::binary_tree(1, 0.1, 1'000'000'000);
  t.link(1).loss_rate = 0.05;
  Simulator sim(std::move(t), 42);
  size_t delivered = 0;
  sim.set_deliver([&](int, int, PathKind, ByteSpan, int64_t) { ++delivered; });
  const size_t kTotal = 100000;
  for (size_t i = 0; i < kTotal; ++i) {
    sim.send_unicast(0, 1, PathKind::Unicast, Bytes(100, 0));
  }
  sim.run_until(int64_t(1e15));
  double rate = 1.0 - double(delivered) / double(kTotal);
  CHECK(rate > 0.045);
  CHECK(rate < 0.055);
}

TEST_CASE("loss scope respects unicast exemption") {
  auto t = Topology::binary_tree(1, 0.1, 1'000'000'000);
  t.link(1).loss_rate = 0.5;
  t.link(1).scope = LossScope::McOnly;
  t.set_member(1, true);
  Simulator sim(std::move(t), 7);
  size_t uc = 0, mc = 0;
  sim.set_deliver([&](int, int, PathKind path, ByteSpan, int64_t) {
    if (path == PathKind::Unicast) ++uc;
    else ++mc;
  });
  for (int i = 0; i < 1000; ++i) {
    sim.send_unicast(0, 1, PathKind::Unicast, Bytes(50, 0));
    sim.send_group(PathKind::McData, Bytes(50, 0));
  }
  sim.run_until(int64_t(1e15));
  CHECK(uc == 1000);
  CHECK(mc < 700);
  CHECK(mc > 300);
}

TEST_CASE("shared top link: identical loss pattern across the branch") {
  // Clients 4 and 5 sit under node 2; with loss only on link 2, either
  // both receive a group datagram or neither does.
  auto t = Topology::binary_tree(5, 0.5, 1'000'000'000);
  t.apply_loss_profile({LossProfile::Kind::SharedTopLink, 0.3});
  t.set_member(4, true);
  t.set_member(5, true);
  Simulator sim(std::move(t), 9);
  std::map<int, std::set<int>> got;  // datagram idx -> nodes
  int idx = -1;
  sim.set_deliver([&](int node, int, PathKind, ByteSpan b, int64_t) {
    got[int(b[0])].insert(node);
  });
  for (int i = 0; i < 200; ++i) {
    ++idx;
    sim.send_group(PathKind::McData, Bytes(10, uint8_t(i)));
  }
  sim.run_until(int64_t(1e15));
  size_t full = 0;
  for (auto& [i, nodes] : got) {
    CHECK(nodes.size() == 2);  // never a partial delivery
    ++full;
  }
  CHECK(full < 200);  // some datagrams vanished entirely
  CHECK(full > 100);
}

TEST_CASE("determinism: same seed, same trace") {
  auto run = [](uint64_t seed) {
    auto t = Topology::binary_tree(7, 1.0, 50'000'000);
    t.apply_loss_profile({LossProfile::Kind::LeafLinks, 0.2});
    for (int i = 1; i <= 7; ++i) t.set_member(i, true);
    Simulator sim(std::move(t), seed);
    std::vector<std::tuple<int, int64_t, size_t>> log;
    sim.set_deliver([&](int node, int, PathKind, ByteSpan b, int64_t now) {
      log.emplace_back(node, now, b.size());
    });
    for (int i = 0; i < 300; ++i) {
      sim.send_group(PathKind::McData, Bytes(100 + i % 7, uint8_t(i)));
      sim.send_unicast(0, 1 + i % 7, PathKind::Unicast, Bytes(60, uint8_t(i)));
    }
    sim.run_until(int64_t(1e15));
    return log;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("conservation: deliveries + drops = transmissions per link") {
  auto t = Topology::binary_tree(15, 0.5, 100'000'000);
  t.apply_loss_profile({LossProfile::Kind::LeafLinks, 0.3});
  for (int i = 1; i <= 15; ++i) t.set_member(i, true);
  Simulator sim(std::move(t), 77);
  sim.set_deliver([](int, int, PathKind, ByteSpan, int64_t) {});
  for (int i = 0; i < 500; ++i) {
    sim.send_group(PathKind::McData, Bytes(200, uint8_t(i)));
  }
  sim.run_until(int64_t(1e15));
  for (const auto& [key, st] : sim.link_stats()) {
    CHECK(st.deliveries + st.drops == st.transmissions);
  }
}

TEST_CASE("multicast link economy: each link carries a datagram at most once") {
  auto t = Topology::binary_tree(50, 1.0, 100'000'000);
  for (int i = 1; i <= 50; ++i) t.set_member(i, true);
  Simulator sim(std::move(t), 3);
  size_t deliveries = 0;
  sim.set_deliver([&](int, int, PathKind, ByteSpan, int64_t) { ++deliveries; });
  const size_t kBytes = 700;
  const int kCount = 40;
  for (int i = 0; i < kCount; ++i) {
    sim.send_group(PathKind::McData, Bytes(kBytes, uint8_t(i)));
  }
  sim.run_until(int64_t(1e15));
  CHECK(deliveries == 50 * kCount);
  uint64_t source_bytes = uint64_t(kBytes) * kCount;
  for (const auto& [key, st] : sim.link_stats()) {
    CHECK(st.group_bytes <= source_bytes);
  }
}
