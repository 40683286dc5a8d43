// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "mobitrail/error.hpp"
#include "mobitrail/geo.hpp"
#include "mobitrail/trace.hpp"

using namespace mobitrail;

TEST_SUITE("geo") {
  TEST_CASE("haversine examples") {
    CHECK(haversine_km({40.0, -3.7}, {40.0, -3.7}) == 0.0);
    CHECK(haversine_km({0, 0}, {0, -180}) == doctest::Approx(std::numbers::pi * 6371.0).epsilon(1e-12));
    CHECK(std::abs(haversine_km({0, 0}, {0, -180}) - 20015.09) < 0.01);
    CHECK(std::abs(haversine_km({0, 0}, {0, 1}) - 111.19) < 0.01);
    CHECK(haversine_km({0, 0}, {0, 1}) == doctest::Approx(std::numbers::pi / 180.0 * 6371.0).epsilon(1e-12));
  }

  TEST_CASE("haversine symmetry, bound and triangle inequality") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0);
    for (int i = 0; i < 20000; ++i) {
      const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
      const double ab = haversine_km(a, b);
      CHECK(ab == haversine_km(b, a));
      CHECK(ab >= 0.0);
      CHECK(ab <= std::numbers::pi * kEarthRadiusKm);
      const double ac = haversine_km(a, c), cb = haversine_km(c, b);
      CHECK(ab <= (ac + cb) * (1.0 + 1e-9) + 1e-12);
      if (a != b) CHECK(ab > 0.0);
    }
  }

  TEST_CASE("normalize_lon wraps into [-180, 180)") {
    CHECK(normalize_lon(180.0) == -180.0);
    CHECK(normalize_lon(-180.0) == -180.0);
    CHECK(normalize_lon(190.0) == doctest::Approx(-170.0));
    CHECK(normalize_lon(-190.0) == doctest::Approx(170.0));
    CHECK(normalize_lon(12.5) == 12.5);
  }

  TEST_CASE("destination_point travels the requested distance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lat(-60.0, 60.0), lon(-180.0, 180.0), brg(0.0, 6.283), km(0.0, 2000.0);
    for (int i = 0; i < 2000; ++i) {
      const GeoPoint o{lat(rng), lon(rng)};
      const double d = km(rng);
      const GeoPoint p = destination_point(o, brg(rng), d);
      CHECK(is_valid(p));
      CHECK(haversine_km(o, p) == doctest::Approx(d).epsilon(1e-7));
    }
  }

  TEST_CASE("unit vector round trip") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
    for (int i = 0; i < 2000; ++i) {
      const GeoPoint p{lat(rng), lon(rng)};
      const GeoPoint q = from_vector(to_unit_vector(p));
      CHECK(haversine_km(p, q) < 1e-9);
    }
  }

  TEST_CASE("pairwise_sum matches naive sum on integers") {
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 100u, 1001u}) {
      double naive = 0.0;
      for (std::size_t i = 0; i < n; ++i) naive += static_cast<double>(i);
      CHECK(pairwise_sum(0, n, [](std::size_t i) { return static_cast<double>(i); }) == naive);
    }
  }
}

TEST_SUITE("trace") {
  TEST_CASE("UserTrace sorts canonically") {
    auto t = fixture::trace("u", {{30, 1, 1, 2}, {10, 5, 5, 9}, {30, 0, 0, 1}, {30, 0, 0, std::nullopt}, {20, 3, 3, 3}});
    REQUIRE(t.size() == 5);
    const auto e = t.events();
    CHECK(e[0].timestamp == 10);
    CHECK(e[1].timestamp == 20);
    CHECK(!e[2].region.has_value());
    CHECK(*e[3].region == 1);
    CHECK(*e[4].region == 2);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(!canonical_less(e[i], e[i - 1]));
  }

  TEST_CASE("UserTrace rejects an empty trace") {
    CHECK_THROWS_AS(UserTrace("u", {}), Error);
  }

  TEST_CASE("canonical order breaks ties by latitude then longitude") {
    Event a{0, 5, {1.0, 2.0}, 7}, b{0, 5, {1.0, 3.0}, 7}, c{0, 5, {0.5, 9.0}, 7};
    CHECK(canonical_less(a, b));
    CHECK(canonical_less(c, a));
    CHECK(!canonical_less(a, a));
  }

  TEST_CASE("EventSet interns user ids") {
    EventSet s;
    const auto a = s.intern("alice");
    const auto b = s.intern("bob");
    CHECK(a != b);
    CHECK(s.intern("alice") == a);
    CHECK(s.intern("bob") == b);
    CHECK(s.users.size() == 2);
  }

  TEST_CASE("TraceSet select keeps order and offsets") {
    std::vector<std::string> users{"a", "b", "c"};
    std::vector<Event> ev{{0, 1, {}, 1}, {1, 1, {}, 1}, {1, 2, {}, 1}, {2, 5, {}, 1}};
    auto set = TraceSet::from_sorted(users, ev);
    CHECK(set.size() == 3);
    CHECK(set[1].size() == 2);
    CHECK(*set.find("c") == 2);
    CHECK(!set.find("zz"));
    auto kept = set.select({true, false, true});
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].user_id == "a");
    CHECK(kept[1].user_id == "c");
    CHECK(kept[1].events[0].timestamp == 5);
    CHECK(kept.event_count() == 2);
  }
}
