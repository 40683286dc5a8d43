// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mobitrail/partition.hpp"
#include "mobitrail/trace.hpp"

namespace mobitrail {

enum class InputFormat { kCsv, kJsonl };

/// Bookkeeping across the prune/filter pipeline. parsed + parse_errors == total_lines
/// (header and blank lines are not counted).
struct IngestReport {
  std::uint64_t total_lines = 0;
  std::uint64_t parsed = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t pruned_unresolvable = 0;
  std::uint64_t users_in = 0;
  std::uint64_t users_after_filter = 0;
};

nlohmann::json to_json(const IngestReport& report);

struct ParseIssue {
  std::uint64_t line = 0;  // 1-based physical line number
  std::string message;
};

struct ParseResult {
  EventSet events;
  IngestReport report;
  std::vector<ParseIssue> issues;  // first kMaxRecordedIssues only
};

inline constexpr std::size_t kMaxRecordedIssues = 100;

/// Parses a CSV (`user_id,timestamp,lat,lon[,region_id]`, header required) or JSONL stream.
/// Timestamps are Unix seconds or ISO-8601; the first parseable line fixes the style for the file.
/// Malformed lines are counted and skipped. Throws Error(kFormat) on a missing CSV header.
ParseResult parse_events(std::istream& in, InputFormat format);

/// Parses one ISO-8601 date-time (`YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH:MM|+HHMM]`) to Unix seconds.
std::optional<std::int64_t> parse_iso8601(std::string_view text) noexcept;

struct PruneResult {
  std::vector<Event> kept;
  std::uint64_t dropped = 0;
};

/// Keeps events the partition resolves and sets their region_id. An event that already carries
/// a region_id valid in `partition` keeps it.
PruneResult prune(std::vector<Event> events, const RegionPartition& partition);
/// In-place variant over an EventSet; returns the number of dropped events.
std::uint64_t prune(EventSet& events, const RegionPartition& partition);

/// Groups events into per-user traces ordered by user_id, each sorted canonically.
/// Users without events are dropped. Consumes the input.
TraceSet group_traces(EventSet events, unsigned threads = 1);

struct FilterPolicy {
  std::uint64_t min_events = 0;
  bool above_average = false;
  std::optional<std::string> consensus_country;
};

/// user_id -> consensus home country; users without consensus are absent.
using ConsensusCountries = std::unordered_map<std::string, std::string>;

/// Keeps traces with count >= min_events, count > mean count of the input set (when
/// above_average), and consensus country equal to the requested one (when set).
/// Throws Error(kInvalidArgument) if a consensus filter is requested with `homes == nullptr`.
TraceSet apply_filter(TraceSet traces, const FilterPolicy& policy, const ConsensusCountries* homes = nullptr);

/// `user_id,timestamp,lat,lon,region_id` rows; region_id left empty when absent.
void write_events_csv(std::ostream& out, const TraceSet& traces);
void write_events_csv(std::ostream& out, const EventSet& events);

/// Shortest round-trip decimal rendering used by every CSV writer.
void append_double(std::string& out, double value);

}  // namespace mobitrail
