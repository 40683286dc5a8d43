// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mobitrail/error.hpp"
#include "mobitrail/ingest.hpp"

using namespace mobitrail;

namespace {

ParseResult parse_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_events(in, InputFormat::kCsv);
}

std::string dump(const TraceSet& t) {
  std::ostringstream out;
  write_events_csv(out, t);
  return out.str();
}

// Deterministic multi-user CSV body, rows in generation order.
std::vector<std::string> random_rows(std::size_t n, std::size_t users, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> user(0, users - 1);
  std::uniform_int_distribution<std::int64_t> ts(1300000000, 1300000000 + 86400 * 30);
  std::uniform_real_distribution<double> lat(36.0, 43.0), lon(-9.0, -1.0);
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream r;
    r.precision(17);
    r << "user" << user(rng) << ',' << ts(rng) << ',' << lat(rng) << ',' << lon(rng);
    rows.push_back(r.str());
  }
  return rows;
}

std::string join(const std::vector<std::string>& rows) {
  std::string s = "user_id,timestamp,lat,lon\n";
  for (const auto& r : rows) s += r + "\n";
  return s;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("csv line maps fields directly") {
    const auto r = parse_csv("user_id,timestamp,lat,lon\nu1,1300000000,40.4,-3.7\n");
    REQUIRE(r.events.size() == 1);
    const auto& e = r.events.events[0];
    CHECK(r.events.users[e.user] == "u1");
    CHECK(e.timestamp == 1300000000);
    CHECK(e.point.lat_deg == 40.4);
    CHECK(e.point.lon_deg == -3.7);
    CHECK(!e.region.has_value());
    CHECK(r.report.parsed == 1);
    CHECK(r.report.parse_errors == 0);
    CHECK(r.report.total_lines == 1);
  }

  TEST_CASE("malformed line is skipped and counted with its line number") {
    const auto r = parse_csv("user_id,timestamp,lat,lon\nu1,notatime,40.4,-3.7\nu2,1300000000,40.4,-3.7\n");
    CHECK(r.events.size() == 1);
    CHECK(r.report.parse_errors == 1);
    CHECK(r.report.parsed == 1);
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].line == 2);
  }

  TEST_CASE("empty input after header gives zeros") {
    const auto r = parse_csv("user_id,timestamp,lat,lon\n");
    CHECK(r.events.size() == 0);
    CHECK(r.report.total_lines == 0);
    CHECK(r.report.parsed == 0);
    CHECK(r.report.parse_errors == 0);
  }

  TEST_CASE("missing header is fatal") {
    CHECK_THROWS_AS(parse_csv("u1,1300000000,40.4,-3.7\n"), Error);
    CHECK_THROWS_AS(parse_csv(""), Error);
  }

  TEST_CASE("invalid values are rejected") {
    const auto r = parse_csv(
        "user_id,timestamp,lat,lon\n"
        "u1,-5,40,-3\n"
        "u1,10,91,-3\n"
        "u1,10,40,-181\n"
        ",10,40,-3\n"
        "u1,10,40\n"
        "u1,10,40,abc\n"
        "u1,10,40,180\n");
    CHECK(r.report.parse_errors == 6);
    REQUIRE(r.report.parsed == 1);
    CHECK(r.events.events[0].point.lon_deg == -180.0);
    CHECK(r.report.parsed + r.report.parse_errors == r.report.total_lines);
  }

  TEST_CASE("header columns are matched by name and region_id is optional") {
    const auto r = parse_csv("lat,lon,extra,user_id,timestamp,region_id\n40,-3,zz,u9,100,17\n41,-4,zz,u9,200,\n");
    REQUIRE(r.events.size() == 2);
    CHECK(*r.events.events[0].region == 17);
    CHECK(!r.events.events[1].region.has_value());
    CHECK(r.events.events[0].point.lat_deg == 40.0);
  }

  TEST_CASE("ISO-8601 timestamps") {
    CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601("2011-03-13T07:06:40Z") == 1300000000);
    CHECK(parse_iso8601("2011-03-13 07:06:40") == 1300000000);
    CHECK(parse_iso8601("2011-03-13T09:06:40+02:00") == 1300000000);
    CHECK(parse_iso8601("2011-03-13T02:06:40-0500") == 1300000000);
    CHECK(parse_iso8601("2011-03-13T07:06:40.75Z") == 1300000000);
    CHECK(!parse_iso8601("2011-02-30T00:00:00Z"));
    CHECK(!parse_iso8601("yesterday"));
    const auto r = parse_csv("user_id,timestamp,lat,lon\nu,2011-03-13T07:06:40Z,1,1\nu,1300000000,1,1\n");
    CHECK(r.report.parsed == 1);
    CHECK(r.report.parse_errors == 1);
    CHECK(r.events.events[0].timestamp == 1300000000);
  }

  TEST_CASE("jsonl input") {
    std::istringstream in(
        R"({"user_id": "u1", "timestamp": 1300000000, "lat": 40.4, "lon": -3.7})"
        "\n"
        R"({"user_id": "u2", "timestamp": "2011-03-13T07:06:40Z", "lat": 41, "lon": 2, "region_id": 5})"
        "\n{broken\n"
        R"({"user_id": "u3", "lat": 41, "lon": 2})"
        "\n");
    const auto r = parse_events(in, InputFormat::kJsonl);
    CHECK(r.report.total_lines == 4);
    CHECK(r.report.parsed == 1);
    CHECK(r.report.parse_errors == 3);
  }

  TEST_CASE("prune examples") {
    const auto g = RegionPartition::lookup({{1, {"box", "ES"}, {36, -10, 44, 4}, {}}});
    std::vector<Event> ev{{0, 1, {40, -3}, {}}, {0, 2, {41, -2}, {}}, {0, 3, {42, 0}, {}}, {0, 4, {40, -30}, {}}};
    auto r = prune(ev, g);
    CHECK(r.kept.size() == 3);
    CHECK(r.dropped == 1);
    for (const auto& e : r.kept) CHECK(e.region == 1);

    std::vector<Event> out{{0, 1, {0, 0}, {}}, {0, 2, {10, 10}, {}}};
    auto all = prune(out, g);
    CHECK(all.kept.empty());
    CHECK(all.dropped == 2);

    auto none = prune({}, g);
    CHECK(none.kept.empty());
    CHECK(none.dropped == 0);
  }

  TEST_CASE("prune only touches region_id") {
    const auto g = RegionPartition::grid(0.5);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180);
    std::vector<Event> ev;
    for (int i = 0; i < 1000; ++i) ev.push_back({static_cast<UserIndex>(i % 7), i * 13, {lat(rng), lon(rng)}, {}});
    const auto before = ev;
    auto r = prune(ev, g);
    REQUIRE(r.kept.size() == before.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(r.kept[i].user == before[i].user);
      CHECK(r.kept[i].timestamp == before[i].timestamp);
      CHECK(r.kept[i].point == before[i].point);
      CHECK(r.kept[i].region == g.assign(before[i].point));
    }
  }

  TEST_CASE("prune keeps a supplied region id that the partition knows") {
    const auto p = RegionPartition::lookup({{1, {}, {0, 0, 1, 1}, {}}, {2, {}, {5, 5, 6, 6}, {}}});
    auto r = prune(std::vector<Event>{{0, 1, {0.5, 0.5}, 2}, {0, 2, {0.5, 0.5}, 99}}, p);
    REQUIRE(r.kept.size() == 2);
    CHECK(r.kept[0].region == 2);
    CHECK(r.kept[1].region == 1);
  }

  TEST_CASE("group examples") {
    EventSet s;
    s.events.push_back({s.intern("u1"), 5, {1, 1}, 1});
    s.events.push_back({s.intern("u2"), 3, {1, 1}, 1});
    s.events.push_back({s.intern("u1"), 2, {1, 1}, 1});
    const auto t = group_traces(std::move(s));
    REQUIRE(t.size() == 2);
    CHECK(t[0].user_id == "u1");
    REQUIRE(t[0].size() == 2);
    CHECK(t[0].events[0].timestamp == 2);
    CHECK(t[0].events[1].timestamp == 5);
    CHECK(t[1].size() == 1);
  }

  TEST_CASE("grouping 10 000 events over 100 users matches a hash-map count") {
    const auto rows = random_rows(10000, 100, 77);
    auto parsed = parse_csv(join(rows));
    std::vector<std::string> names;
    for (const auto& e : parsed.events.events) names.push_back(parsed.events.users[e.user]);
    const auto expected = oracle::count_by_user(names);
    for (unsigned threads : {1u, 3u}) {
      auto copy = parsed.events;
      const auto t = group_traces(std::move(copy), threads);
      CHECK(t.size() == expected.size());
      CHECK(t.event_count() == 10000);
      std::size_t sum = 0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t[i].size() == expected.at(std::string(t[i].user_id)));
        if (i > 0) CHECK(t[i - 1].user_id < t[i].user_id);
        for (std::size_t k = 1; k < t[i].size(); ++k) CHECK(!canonical_less(t[i].events[k], t[i].events[k - 1]));
        sum += t[i].size();
      }
      CHECK(sum == 10000);
    }
  }

  TEST_CASE("pipeline is insensitive to input order") {
    auto rows = random_rows(3000, 40, 5);
    const auto g = RegionPartition::grid(0.5);
    auto run = [&](const std::vector<std::string>& r, const FilterPolicy& policy) {
      auto parsed = parse_csv(join(r));
      prune(parsed.events, g);
      return dump(apply_filter(group_traces(std::move(parsed.events)), policy));
    };
    const FilterPolicy p1{0, false, std::nullopt}, p2{70, false, std::nullopt}, p3{0, true, std::nullopt};
    const auto a1 = run(rows, p1), a2 = run(rows, p2), a3 = run(rows, p3);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 3; ++k) {
      std::shuffle(rows.begin(), rows.end(), rng);
      CHECK(run(rows, p1) == a1);
      CHECK(run(rows, p2) == a2);
      CHECK(run(rows, p3) == a3);
    }
  }

  TEST_CASE("filter examples") {
    std::vector<std::string> users{"a", "b", "c"};
    std::vector<Event> ev;
    const std::size_t counts[] = {1, 3, 8};
    for (UserIndex u = 0; u < 3; ++u)
      for (std::size_t k = 0; k < counts[u]; ++k) ev.push_back({u, static_cast<std::int64_t>(k), {}, 1});
    const auto set = TraceSet::from_sorted(users, ev);

    const auto above = apply_filter(set, {0, true, std::nullopt});
    REQUIRE(above.size() == 1);
    CHECK(above[0].user_id == "c");

    const auto ident = apply_filter(set, {1, false, std::nullopt});
    CHECK(dump(ident) == dump(set));

    const auto min3 = apply_filter(set, {3, false, std::nullopt});
    CHECK(min3.size() == 2);
    CHECK(dump(apply_filter(min3, {3, false, std::nullopt})) == dump(min3));

    CHECK_THROWS_AS(apply_filter(set, {0, false, std::string("ES")}), Error);

    ConsensusCountries homes{{"a", "ES"}, {"c", "FR"}};
    const auto es = apply_filter(set, {0, false, std::string("ES")}, &homes);
    REQUIRE(es.size() == 1);
    CHECK(es[0].user_id == "a");
  }

  TEST_CASE("above-average is strict") {
    std::vector<Event> ev{{0, 1, {}, 1}, {0, 2, {}, 1}, {1, 1, {}, 1}, {1, 2, {}, 1}};
    const auto set = TraceSet::from_sorted({"a", "b"}, ev);
    CHECK(apply_filter(set, {0, true, std::nullopt}).empty());
  }

  TEST_CASE("csv writer round-trips through the parser") {
    auto rows = random_rows(500, 10, 12);
    auto parsed = parse_csv(join(rows));
    prune(parsed.events, RegionPartition::grid(0.25));
    const auto t = group_traces(std::move(parsed.events));
    const auto text = dump(t);
    CHECK(text.rfind("user_id,timestamp,lat,lon,region_id\n", 0) == 0);
    auto again = parse_csv(text);
    CHECK(again.report.parse_errors == 0);
    CHECK(dump(group_traces(std::move(again.events))) == text);
  }

  TEST_CASE("ingest report json") {
    IngestReport r{10, 8, 2, 1, 4, 3};
    const auto j = to_json(r);
    CHECK(j["total_lines"] == 10);
    CHECK(j["users_after_filter"] == 3);
  }
}
