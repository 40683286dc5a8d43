// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mobitrail/error.hpp"
#include "mobitrail/homedetect.hpp"
#include "mobitrail/ingest.hpp"

using namespace mobitrail;

namespace {

constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kHour = 3600;
constexpr std::int64_t kBase = 1300000000 - 1300000000 % kDay;  // a UTC midnight

std::vector<oracle::Ev> random_small_trace(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n(1, 30), regions(1, 5), hour(0, 23), day(0, 9), minute(0, 59);
  const int count = n(rng);
  const int nreg = regions(rng);
  std::uniform_int_distribution<int> reg(1, nreg);
  std::vector<oracle::Ev> ev;
  for (int i = 0; i < count; ++i)
    ev.push_back({kBase + day(rng) * kDay + hour(rng) * kHour + minute(rng) * 60, 100 + reg(rng)});
  return ev;
}

}  // namespace

TEST_SUITE("homedetect") {
  TEST_CASE("night window boundaries") {
    const NightWindow w;
    CHECK(is_night(kBase + 19 * kHour, w));
    CHECK(!is_night(kBase + 7 * kHour, w));
    CHECK(is_night(kBase + 3 * kHour + 1800, w));
    CHECK(is_night(kBase + 7 * kHour - 1, w));
    CHECK(!is_night(kBase + 19 * kHour - 1, w));
    const NightWindow shifted{19, 7, 120};
    CHECK(is_night(kBase + 17 * kHour, shifted));
    CHECK(!is_night(kBase + 5 * kHour, shifted));
    const NightWindow nonwrap{1, 5, 0};
    CHECK(is_night(kBase + 2 * kHour, nonwrap));
    CHECK(!is_night(kBase + 23 * kHour, nonwrap));
  }

  TEST_CASE("night belongs to the date it started") {
    const NightWindow w;
    CHECK(night_day(kBase + 20 * kHour, w) == night_day(kBase + kDay + 3 * kHour, w));
    CHECK(night_day(kBase + kDay + 20 * kHour, w) == night_day(kBase + 20 * kHour, w) + 1);
    CHECK(local_day(kBase + kDay + 3 * kHour, 0) == local_day(kBase, 0) + 1);
    CHECK(local_day(-1, 0) == -1);
  }

  TEST_CASE("window validation") {
    CHECK_THROWS_AS((NightWindow{7, 7, 0}.validate()), Error);
    CHECK_THROWS_AS((NightWindow{24, 7, 0}.validate()), Error);
    CHECK_NOTHROW(NightWindow{}.validate());
  }

  TEST_CASE("method 1 picks the region with most events") {
    std::vector<oracle::Ev> ev;
    for (int i = 0; i < 5; ++i) ev.push_back({kBase + i * 10, 1});
    for (int i = 0; i < 2; ++i) ev.push_back({kBase + 100 + i, 2});
    const auto h = detect_home(fixture::region_trace("u", ev).view(), Method::kMaxEvents, {});
    CHECK(h.region == 1);
    CHECK(h.score == 5.0);
    CHECK(!h.tied);
  }

  TEST_CASE("equal counts tie, active days decide method 2") {
    // A on days {d1, d1, d2}; B on days {d3, d4, d5}. Daytime hours.
    std::vector<oracle::Ev> ev{{kBase + 10 * kHour, 1},
                               {kBase + 11 * kHour, 1},
                               {kBase + kDay + 10 * kHour, 1},
                               {kBase + 2 * kDay + 10 * kHour, 2},
                               {kBase + 3 * kDay + 10 * kHour, 2},
                               {kBase + 4 * kDay + 10 * kHour, 2}};
    const auto t = fixture::region_trace("u", ev);
    const auto m1 = detect_home(t.view(), Method::kMaxEvents, {});
    CHECK(m1.tied);
    CHECK(m1.region == 1);  // earlier first event
    CHECK(m1.score == 3.0);
    const auto m2 = detect_home(t.view(), Method::kMaxActiveDays, {});
    CHECK(m2.region == 2);
    CHECK(m2.score == 3.0);
    CHECK(!m2.tied);
  }

  TEST_CASE("timespan versus burst") {
    std::vector<oracle::Ev> ev{{kBase, 1}, {kBase + 1000000, 1}};
    for (int i = 0; i < 50; ++i) ev.push_back({kBase + 5000 + i * 70, 2});
    const auto t = fixture::region_trace("u", ev);
    const auto m3 = detect_home(t.view(), Method::kMaxTimespan, {});
    CHECK(m3.region == 1);
    CHECK(m3.score == 1e6);
    CHECK(detect_home(t.view(), Method::kMaxEvents, {}).region == 2);
  }

  TEST_CASE("zero statistics give none") {
    // Single daytime event per region: timespan and night methods have nothing.
    const auto t = fixture::region_trace("u", {{kBase + 12 * kHour, 1}, {kBase + 13 * kHour, 2}});
    const auto all = detect_all(t.view(), {});
    CHECK(all[0].region == 1);
    CHECK(all[0].tied);
    CHECK(!all[2].region.has_value());
    CHECK(all[2].score == 0.0);
    CHECK(!all[3].region.has_value());
    CHECK(!all[4].region.has_value());
  }

  TEST_CASE("tie-break falls back to the smaller region id") {
    const auto t = fixture::region_trace("u", {{kBase, 9}, {kBase, 4}});
    const auto h = detect_home(t.view(), Method::kMaxEvents, {});
    CHECK(h.region == 4);
    CHECK(h.tied);
  }

  TEST_CASE("single-region trace gives that region five times") {
    const auto t = fixture::region_trace("u", {{kBase + 20 * kHour, 7}, {kBase + kDay + 2 * kHour, 7}});
    for (const auto& a : detect_all(t.view(), {})) {
      CHECK(a.region == 7);
      CHECK(!a.tied);
    }
    const auto all = detect_all(t.view(), {});
    CHECK(all[4].score == 1.0);  // one night spanning midnight
  }

  TEST_CASE("traveler fixture: methods 3 and 4 disagree") {
    // Home region 1: nights across the year, one evening each. Region 2: a long-spanning
    // daytime region visited at the very start and end. Region 3..6: short bursts.
    std::vector<oracle::Ev> ev;
    ev.push_back({kBase + 10 * kHour, 2});
    for (int d = 10; d < 20; ++d) ev.push_back({kBase + d * kDay + 21 * kHour, 1});
    for (int r = 3; r <= 6; ++r)
      for (int k = 0; k < 3; ++k) ev.push_back({kBase + (20 + r) * kDay + (9 + k) * kHour, r});
    ev.push_back({kBase + 300 * kDay + 10 * kHour, 2});
    const auto all = detect_all(fixture::region_trace("u", ev).view(), {});
    CHECK(all[2].region == 2);
    CHECK(all[3].region == 1);
    CHECK(all[2].region != all[3].region);
  }

  TEST_CASE("brute-force enumeration on random small traces") {
    std::mt19937_64 rng(123);
    std::uniform_int_distribution<int> start(0, 23), end(0, 23), off(-12, 14);
    for (int k = 0; k < 2000; ++k) {
      const auto ev = random_small_trace(rng);
      NightWindow w{19, 7, 0};
      if (k % 2) {
        do {
          w.start_hour = start(rng);
          w.end_hour = end(rng);
        } while (w.start_hour == w.end_hour);
        w.utc_offset_minutes = off(rng) * 60 + (k % 4 == 1 ? 30 : 0);
      }
      const oracle::Window ow{w.start_hour, w.end_hour, w.utc_offset_minutes};
      const auto t = fixture::region_trace("u", ev);
      const auto all = detect_all(t.view(), w);
      for (Method m : kAllMethods) {
        const auto expected = oracle::brute_home(ev, method_number(m), ow);
        const auto got = detect_home(t.view(), m, w);
        CHECK(got == all[method_index(m)]);
        CHECK(got.region == expected.region);
        CHECK(got.score == expected.score);
        CHECK(got.tied == expected.tied);
        CHECK(got.method == m);
        // Winner dominates every region.
        std::set<std::int64_t> regions;
        for (const auto& e : ev) regions.insert(e.region);
        for (auto r : regions) CHECK(oracle::statistic(ev, r, method_number(m), ow) <= got.score);
      }
    }
  }

  TEST_CASE("invariance under permutation, shifts and duplication") {
    std::mt19937_64 rng(7);
    const NightWindow w;
    for (int k = 0; k < 300; ++k) {
      auto ev = random_small_trace(rng);
      const auto base = detect_all(fixture::region_trace("u", ev).view(), w);
      auto shuffled = ev;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(detect_all(fixture::region_trace("u", shuffled).view(), w) == base);

      auto day_shift = ev;
      for (auto& e : day_shift) e.ts += 17 * kDay;
      const auto ds = detect_all(fixture::region_trace("u", day_shift).view(), w);
      for (int m : {0, 1, 2, 3, 4}) CHECK(ds[m].region == base[m].region);

      auto odd_shift = ev;
      for (auto& e : odd_shift) e.ts += 12345;
      const auto os = detect_all(fixture::region_trace("u", odd_shift).view(), w);
      CHECK(os[0].region == base[0].region);
      CHECK(os[2].region == base[2].region);

      auto doubled = ev;
      doubled.insert(doubled.end(), ev.begin(), ev.end());
      const auto dd = detect_all(fixture::region_trace("u", doubled).view(), w);
      for (int m : {0, 1, 2, 3, 4}) CHECK(dd[m].region == base[m].region);
    }
  }

  TEST_CASE("events without a region are rejected") {
    const auto t = fixture::trace("u", {{1, 0, 0, std::nullopt}});
    CHECK_THROWS_AS(detect_all(t.view(), {}), Error);
  }

  TEST_CASE("consensus country examples") {
    const auto p = RegionPartition::load_lookup(fixture::source_dir() / "provinces.jsonl");
    auto five = [](std::array<std::optional<RegionId>, 5> r) {
      std::vector<HomeAssignment> out;
      for (std::size_t i = 0; i < 5; ++i) out.push_back({"u", kAllMethods[i], r[i], 1.0, false});
      return out;
    };
    CHECK(consensus_country(five({1, 2, 3, 4, 5}), p) == "ES");
    CHECK(!consensus_country(five({1, 2, 3, 4, 21}), p).has_value());
    CHECK(!consensus_country(five({1, 2, 3, 4, std::nullopt}), p).has_value());
    CHECK(consensus_country(five({21, 22, 21, 21, 25}), p) == "FR");
    const auto g = RegionPartition::grid(1.0);
    const auto cell = *g.assign({40, -3});
    CHECK(!consensus_country(five({cell, cell, cell, cell, cell}), g).has_value());
  }

  TEST_CASE("consensus filter on 500 traces matches a per-user re-check") {
    const auto p = RegionPartition::load_lookup(fixture::source_dir() / "provinces.jsonl");
    std::map<std::int64_t, std::string> country;
    for (const auto& r : p.regions()) country[r.id] = r.meta.country_code;
    std::mt19937_64 rng(500);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> es(1, 20), fr(21, 25), day(0, 60), hour(0, 23);
    std::vector<std::string> users;
    std::vector<Event> events;
    std::map<std::string, std::vector<oracle::Ev>> raw;
    for (UserIndex i = 0; i < 500; ++i) {
      const std::string name = "user" + std::to_string(10000 + i);
      users.push_back(name);
      const int home = u(rng) < 0.6 ? es(rng) : fr(rng);
      const bool dominant = u(rng) < 0.5;
      std::vector<oracle::Ev> ev;
      const int n = 5 + static_cast<int>(u(rng) * 40);
      for (int k = 0; k < n; ++k) {
        const auto ts = kBase + day(rng) * kDay + hour(rng) * kHour;
        int region = home;
        if (!dominant || u(rng) < 0.2) region = u(rng) < 0.5 ? es(rng) : fr(rng);
        ev.push_back({ts, region});
      }
      if (dominant)  // force every method onto the home region
        for (int d = 0; d < 60; ++d) ev.push_back({kBase + d * kDay + 22 * kHour, home});
      std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ts, a.region) < std::tie(b.ts, b.region);
      });
      for (const auto& e : ev) events.push_back({i, e.ts, {}, e.region});
      raw[name] = ev;
    }
    const auto traces = TraceSet::from_sorted(users, events);
    const auto homes = detect_all(traces, NightWindow{}, 2);
    const auto countries = consensus_countries(homes, p);
    const auto kept = apply_filter(traces, {0, false, std::string("ES")}, &countries);

    std::set<std::string> expected;
    for (const auto& [name, ev] : raw)
      if (oracle::unanimous_country(ev, {}, country) == std::optional<std::string>("ES")) expected.insert(name);
    std::set<std::string> got;
    for (std::size_t i = 0; i < kept.size(); ++i) got.insert(std::string(kept[i].user_id));
    CHECK(got == expected);
    CHECK(expected.size() > 50);
    CHECK(expected.size() < 400);
  }

  TEST_CASE("detect_all over a trace set is thread-count independent") {
    std::mt19937_64 rng(31);
    std::vector<std::string> users;
    std::vector<Event> events;
    for (UserIndex i = 0; i < 300; ++i) {
      users.push_back("u" + std::to_string(1000 + i));
      auto ev = random_small_trace(rng);
      std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ts, a.region) < std::tie(b.ts, b.region);
      });
      for (const auto& e : ev) events.push_back({i, e.ts, {}, e.region});
    }
    const auto set = TraceSet::from_sorted(users, events);
    std::ostringstream a, b;
    write_homes_csv(a, detect_all(set, {}, 1));
    write_homes_csv(b, detect_all(set, {}, 4));
    CHECK(a.str() == b.str());
  }

  TEST_CASE("homes csv round trip and validation") {
    const auto t = fixture::region_trace("u1", {{kBase + 20 * kHour, 3}, {kBase + 30 * kHour, 4}});
    std::vector<HomeAssignments> homes{detect_all(t.view(), {})};
    std::ostringstream out;
    write_homes_csv(out, homes);
    CHECK(out.str().rfind("user_id,method,region_id,score,tied\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(read_homes_csv(in) == homes);

    std::istringstream missing("user_id,method,region_id,score,tied\nu,1,3,1,0\n");
    CHECK_THROWS_AS(read_homes_csv(missing), Error);
    std::istringstream bad_header("a,b\n");
    CHECK_THROWS_AS(read_homes_csv(bad_header), Error);
  }

  TEST_CASE("method numbers") {
    CHECK(method_from_number(3) == Method::kMaxTimespan);
    CHECK_THROWS_AS(method_from_number(0), Error);
    CHECK_THROWS_AS(method_from_number(6), Error);
  }
}
