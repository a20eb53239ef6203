#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mcquic/wire.hpp"

using namespace mcquic;

TEST_CASE("insert merges adjacent and overlapping ranges") {
  PnRangeSet s;
  s.insert(3);
  s.insert(5);
  CHECK(s.size() == 2);
  s.insert(4);
  CHECK(s.size() == 1);
  CHECK(s.ranges()[0] == PnRange{3, 5});
  s.insert_range(1, 2);
  CHECK(s.size() == 1);
  CHECK(s.ranges()[0] == PnRange{1, 5});
  s.insert_range(10, 12);
  s.insert_range(4, 9);
  CHECK(s.size() == 1);
  CHECK(s.ranges()[0] == PnRange{1, 12});
}

TEST_CASE("any insertion permutation yields the same canonical form") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::set<uint64_t> pns;
    size_t n = 1 + rng() % 40;
    for (size_t i = 0; i < n; ++i) pns.insert(rng() % 60);
    std::vector<uint64_t> order(pns.begin(), pns.end());
    PnRangeSet reference;
    for (uint64_t pn : order) reference.insert(pn);
    for (int perm = 0; perm < 4; ++perm) {
      std::shuffle(order.begin(), order.end(), rng);
      PnRangeSet s;
      for (uint64_t pn : order) s.insert(pn);
      CHECK(s == reference);
      for (uint64_t pn = 0; pn < 60; ++pn) {
        CHECK(s.contains(pn) == (pns.count(pn) > 0));
      }
    }
    CHECK(reference.count() == pns.size());
  }
}

TEST_CASE("gaps_within") {
  PnRangeSet s;
  s.insert(0);
  s.insert(2);
  s.insert_range(5, 7);
  auto gaps = s.gaps_within(0, 7);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps.ranges()[0] == PnRange{1, 1});
  CHECK(gaps.ranges()[1] == PnRange{3, 4});

  CHECK(s.gaps_within(5, 7).empty());
  auto tail = s.gaps_within(6, 10);
  REQUIRE(tail.size() == 1);
  CHECK(tail.ranges()[0] == PnRange{8, 10});
  CHECK(s.gaps_within(3, 1).empty());
}

TEST_CASE("erase_up_to") {
  PnRangeSet s;
  s.insert_range(0, 4);
  s.insert_range(8, 10);
  s.erase_up_to(2);
  REQUIRE(s.size() == 2);
  CHECK(s.ranges()[0] == PnRange{3, 4});
  s.erase_up_to(9);
  REQUIRE(s.size() == 1);
  CHECK(s.ranges()[0] == PnRange{10, 10});
  s.erase_up_to(10);
  CHECK(s.empty());
}
