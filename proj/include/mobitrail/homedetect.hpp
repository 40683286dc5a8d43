// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobitrail/ingest.hpp"
#include "mobitrail/partition.hpp"
#include "mobitrail/trace.hpp"

namespace mobitrail {

/// Home location definitions, numbered 1..5.
enum class Method : int {
  kMaxEvents = 1,       // most events
  kMaxActiveDays = 2,   // most distinct local dates
  kMaxTimespan = 3,     // longest first-to-last span
  kMaxNightEvents = 4,  // most events inside the night window
  kMaxNightDays = 5,    // most distinct nights with an event
};

inline constexpr std::array<Method, 5> kAllMethods{Method::kMaxEvents, Method::kMaxActiveDays, Method::kMaxTimespan,
                                                   Method::kMaxNightEvents, Method::kMaxNightDays};
inline constexpr std::size_t kMethodCount = kAllMethods.size();

inline int method_number(Method m) noexcept { return static_cast<int>(m); }
inline std::size_t method_index(Method m) noexcept { return static_cast<std::size_t>(m) - 1; }
/// Throws Error(kInvalidArgument) outside 1..5.
Method method_from_number(int value);

/// Local-time window [start_hour, end_hour), wrapping past midnight when start > end.
struct NightWindow {
  int start_hour = 19;
  int end_hour = 7;
  int utc_offset_minutes = 0;

  void validate() const;
};

/// Local calendar day number (days since 1970-01-01 in local time).
std::int64_t local_day(std::int64_t timestamp, int utc_offset_minutes) noexcept;
bool is_night(std::int64_t timestamp, const NightWindow& w) noexcept;
/// Local date on which the night containing `timestamp` started (previous date for the
/// after-midnight part of a wrapping window). Only meaningful when is_night() holds.
std::int64_t night_day(std::int64_t timestamp, const NightWindow& w) noexcept;

struct HomeAssignment {
  std::string user_id;
  Method method = Method::kMaxEvents;
  std::optional<RegionId> region;  // none when the statistic is zero for every region
  double score = 0.0;
  bool tied = false;

  friend bool operator==(const HomeAssignment&, const HomeAssignment&) = default;
};

using HomeAssignments = std::array<HomeAssignment, kMethodCount>;

/// Winner is the argmax of the method's per-region statistic; ties go to the region with the
/// earlier first event, then the smaller region_id, and set `tied`.
HomeAssignment detect_home(const TraceView& trace, Method method, const NightWindow& window);
/// All five methods in one pass over the trace; element i holds method i + 1.
HomeAssignments detect_all(const TraceView& trace, const NightWindow& window);
std::vector<HomeAssignments> detect_all(const TraceSet& traces, const NightWindow& window, unsigned threads = 1);

/// Common country of the five winners, or none if any winner is missing or the countries differ.
std::optional<std::string> consensus_country(std::span<const HomeAssignment> assignments,
                                             const RegionPartition& partition);
ConsensusCountries consensus_countries(std::span<const HomeAssignments> homes, const RegionPartition& partition);

/// `user_id,method,region_id,score,tied`, one row per user and method.
void write_homes_csv(std::ostream& out, std::span<const HomeAssignments> homes);
/// Inverse of write_homes_csv; every user must carry all five methods.
std::vector<HomeAssignments> read_homes_csv(std::istream& in);

}  // namespace mobitrail
