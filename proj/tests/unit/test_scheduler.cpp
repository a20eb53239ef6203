#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcquic/fec.hpp"
#include "scheduler_cases.hpp"

using namespace mcquic;
using mcquic::testgen::scheduler_cases;

namespace {

SentLog build_log(const std::vector<std::tuple<uint64_t, bool, bool>>& sent) {
  SentLog log;
  for (auto [pn, reliable, is_repair] : sent) {
    SentPacketRecord rec;
    rec.pn = pn;
    rec.carries_reliable = reliable;
    rec.is_repair = is_repair;
    log[pn] = rec;
  }
  return log;
}

// Establishes a starting backlog through a real NACK over a synthetic
// block of reliable packets.
void seed_backlog(RepairScheduler& sched, uint64_t nb) {
  if (nb == 0) return;
  SentLog prep;
  PnRangeSet ranges;
  for (uint64_t pn = 1000; pn < 1000 + nb; ++pn) {
    SentPacketRecord rec;
    rec.pn = pn;
    rec.carries_reliable = true;
    prep[pn] = rec;
    ranges.insert(pn);
  }
  sched.on_nack(ranges, 1000 + nb, prep);
  REQUIRE(sched.nb_to_send() == nb);
}

}  // namespace

TEST_CASE("table-driven Listing-1 conformance in both modes") {
  for (bool literal : {false, true}) {
    for (const auto& c : scheduler_cases()) {
      CAPTURE(c.name);
      CAPTURE(literal);
      RepairScheduler sched(32, literal);
      seed_backlog(sched, c.initial_nb_to_send);
      for (auto [pn, t] : c.repair_sends) {
        // register one unit of demand, then mark it sent; the backlog
        // nets out while sent_repairs gains exactly this entry
        SentLog prep;
        PnRangeSet r;
        SentPacketRecord rec;
        rec.pn = 900;
        rec.carries_reliable = true;
        prep[900] = rec;
        r.insert(900);
        sched.on_nack(r, 901, prep);
        sched.begin_round();
        REQUIRE(sched.should_send_repair());
        sched.on_repair_sent(pn, int64_t(t));
      }
      REQUIRE(sched.nb_to_send() == c.initial_nb_to_send);
      PnRangeSet ranges;
      for (auto [lo, hi] : c.nack_ranges) ranges.insert_range(lo, hi);
      sched.on_nack(ranges, c.p_max, build_log(c.sent));
      CHECK(sched.nb_to_send() == (literal ? c.expect_literal
                                           : c.expect_corrected));
    }
  }
}

TEST_CASE("should_send_repair: zero backlog") {
  RepairScheduler sched(32, false);
  sched.begin_round();
  CHECK_FALSE(sched.should_send_repair());
}

TEST_CASE("should_send_repair: decrements per send") {
  RepairScheduler sched(32, false);
  seed_backlog(sched, 2);
  sched.begin_round();
  CHECK(sched.should_send_repair());
  sched.on_repair_sent(50, 0);
  CHECK(sched.should_send_repair());
  sched.on_repair_sent(51, 0);
  CHECK_FALSE(sched.should_send_repair());
  CHECK(sched.nb_to_send() == 0);
}

TEST_CASE("per-round cap: 100 requested, 32 sent, 68 carried over") {
  RepairScheduler sched(32, false);
  seed_backlog(sched, 100);
  sched.begin_round();
  uint64_t sent = 0;
  uint64_t pn = 200;
  while (sched.should_send_repair()) {
    sched.on_repair_sent(pn++, 0);
    ++sent;
  }
  CHECK(sent == 32);
  CHECK(sched.nb_to_send() == 68);
  sched.begin_round();
  sent = 0;
  while (sched.should_send_repair()) {
    sched.on_repair_sent(pn++, 0);
    ++sent;
  }
  CHECK(sent == 32);
  CHECK(sched.nb_to_send() == 36);
}

TEST_CASE("expiration purges sent_repairs") {
  RepairScheduler sched(32, false);
  seed_backlog(sched, 3);
  sched.begin_round();
  sched.on_repair_sent(10, 100);
  sched.on_repair_sent(11, 101);
  sched.on_repair_sent(12, 102);
  CHECK(sched.sent_repairs_size() == 3);
  sched.expire_up_to(11);
  CHECK(sched.sent_repairs_size() == 1);

  // After expiry those repairs no longer shield against re-requests.
  SentLog log;
  for (uint64_t pn = 0; pn < 2; ++pn) {
    SentPacketRecord rec;
    rec.pn = pn;
    rec.carries_reliable = true;
    log[pn] = rec;
  }
  PnRangeSet ranges;
  ranges.insert_range(0, 1);
  sched.on_nack(ranges, 5, log);
  CHECK(sched.nb_to_send() == 1);  // 2 lost - 1 unexpired repair above p_max
}

TEST_CASE("nb_to_send never goes negative") {
  RepairScheduler sched(8, false);
  SentLog log;
  SentPacketRecord rec;
  rec.pn = 0;
  rec.carries_reliable = true;
  log[0] = rec;
  PnRangeSet ranges;
  ranges.insert(0);
  // many repairs credited against a single loss
  seed_backlog(sched, 4);
  sched.begin_round();
  for (uint64_t pn = 100; pn < 104; ++pn) sched.on_repair_sent(pn, 0);
  sched.on_nack(ranges, 1, log);
  CHECK(sched.nb_to_send() == 0);
}
