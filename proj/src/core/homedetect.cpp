// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/homedetect.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "mobitrail/error.hpp"
#include "mobitrail/parallel.hpp"

namespace mobitrail {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  const std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int local_hour(std::int64_t ts, int offset_min) noexcept {
  const std::int64_t local = ts + static_cast<std::int64_t>(offset_min) * 60;
  return static_cast<int>((local - floor_div(local, kSecondsPerDay) * kSecondsPerDay) / 3600);
}

struct RegionStats {
  RegionId id = 0;
  std::int64_t first_ts = 0;
  std::int64_t last_ts = 0;
  std::int64_t events = 0;
  std::int64_t days = 0;
  std::int64_t last_day = 0;
  std::int64_t night_events = 0;
  std::int64_t night_days = 0;
  std::int64_t last_night_day = 0;

  std::int64_t statistic(Method m) const noexcept {
    switch (m) {
      case Method::kMaxEvents: return events;
      case Method::kMaxActiveDays: return days;
      case Method::kMaxTimespan: return last_ts - first_ts;
      case Method::kMaxNightEvents: return night_events;
      case Method::kMaxNightDays: return night_days;
    }
    return 0;
  }
};

// Single pass; relies on the canonical (timestamp-ascending) trace order so that day and
// night-day numbers are non-decreasing within each region.
void accumulate(const TraceView& trace, const NightWindow& w, std::vector<RegionStats>& stats) {
  stats.clear();
  for (const auto& e : trace.events) {
    if (!e.region)
      fail(ErrorCode::kInvalidArgument, "user '" + std::string(trace.user_id) + "' has an event without region_id");
    auto it = std::find_if(stats.begin(), stats.end(), [&](const RegionStats& s) { return s.id == *e.region; });
    const std::int64_t day = local_day(e.timestamp, w.utc_offset_minutes);
    if (it == stats.end()) {
      stats.push_back(RegionStats{*e.region, e.timestamp, e.timestamp, 0, 0, 0, 0, 0, 0});
      it = stats.end() - 1;
      it->last_day = day - 1;
    }
    RegionStats& s = *it;
    ++s.events;
    s.last_ts = e.timestamp;
    if (day != s.last_day) {
      ++s.days;
      s.last_day = day;
    }
    if (is_night(e.timestamp, w)) {
      const std::int64_t nd = night_day(e.timestamp, w);
      if (s.night_events == 0 || nd != s.last_night_day) {
        ++s.night_days;
        s.last_night_day = nd;
      }
      ++s.night_events;
    }
  }
}

HomeAssignment pick(const TraceView& trace, Method m, const std::vector<RegionStats>& stats) {
  HomeAssignment out{std::string(trace.user_id), m, std::nullopt, 0.0, false};
  const RegionStats* best = nullptr;
  std::int64_t best_value = 0;
  int at_max = 0;
  for (const auto& s : stats) {
    const std::int64_t v = s.statistic(m);
    if (v <= 0) continue;
    if (best == nullptr || v > best_value) {
      best = &s;
      best_value = v;
      at_max = 1;
    } else if (v == best_value) {
      ++at_max;
      if (s.first_ts < best->first_ts || (s.first_ts == best->first_ts && s.id < best->id)) best = &s;
    }
  }
  if (best == nullptr) return out;
  out.region = best->id;
  out.score = static_cast<double>(best_value);
  out.tied = at_max > 1;
  return out;
}

}  // namespace

Method method_from_number(int value) {
  if (value < 1 || value > 5) fail(ErrorCode::kInvalidArgument, "method must be 1..5, got " + std::to_string(value));
  return static_cast<Method>(value);
}

void NightWindow::validate() const {
  if (start_hour < 0 || start_hour >= 24 || end_hour < 0 || end_hour >= 24)
    fail(ErrorCode::kInvalidArgument, "night window hours must be in [0, 24)");
  if (start_hour == end_hour) fail(ErrorCode::kInvalidArgument, "night window start and end must differ");
  if (utc_offset_minutes <= -24 * 60 || utc_offset_minutes >= 24 * 60)
    fail(ErrorCode::kInvalidArgument, "UTC offset must be within +/-24h");
}

std::int64_t local_day(std::int64_t timestamp, int utc_offset_minutes) noexcept {
  return floor_div(timestamp + static_cast<std::int64_t>(utc_offset_minutes) * 60, kSecondsPerDay);
}

bool is_night(std::int64_t timestamp, const NightWindow& w) noexcept {
  const int h = local_hour(timestamp, w.utc_offset_minutes);
  if (w.start_hour > w.end_hour) return h >= w.start_hour || h < w.end_hour;
  return h >= w.start_hour && h < w.end_hour;
}

std::int64_t night_day(std::int64_t timestamp, const NightWindow& w) noexcept {
  const std::int64_t day = local_day(timestamp, w.utc_offset_minutes);
  if (w.start_hour > w.end_hour && local_hour(timestamp, w.utc_offset_minutes) < w.end_hour) return day - 1;
  return day;
}

HomeAssignment detect_home(const TraceView& trace, Method method, const NightWindow& window) {
  if (trace.events.empty()) fail(ErrorCode::kInvalidArgument, "home detection on an empty trace");
  std::vector<RegionStats> stats;
  accumulate(trace, window, stats);
  return pick(trace, method, stats);
}

HomeAssignments detect_all(const TraceView& trace, const NightWindow& window) {
  if (trace.events.empty()) fail(ErrorCode::kInvalidArgument, "home detection on an empty trace");
  thread_local std::vector<RegionStats> stats;
  accumulate(trace, window, stats);
  HomeAssignments out;
  for (Method m : kAllMethods) out[method_index(m)] = pick(trace, m, stats);
  return out;
}

std::vector<HomeAssignments> detect_all(const TraceSet& traces, const NightWindow& window, unsigned threads) {
  window.validate();
  std::vector<HomeAssignments> out(traces.size());
  parallel_for(traces.size(), threads, [&](std::size_t i) { out[i] = detect_all(traces[i], window); });
  return out;
}

std::optional<std::string> consensus_country(std::span<const HomeAssignment> assignments,
                                             const RegionPartition& partition) {
  if (assignments.size() != kMethodCount) return std::nullopt;
  std::optional<std::string> common;
  for (const auto& a : assignments) {
    if (!a.region) return std::nullopt;
    auto country = partition.country_of(*a.region);
    if (!country) return std::nullopt;
    if (common && *common != *country) return std::nullopt;
    common = std::move(country);
  }
  return common;
}

ConsensusCountries consensus_countries(std::span<const HomeAssignments> homes, const RegionPartition& partition) {
  ConsensusCountries out;
  for (const auto& h : homes)
    if (auto c = consensus_country(h, partition)) out.emplace(h[0].user_id, std::move(*c));
  return out;
}

void write_homes_csv(std::ostream& out, std::span<const HomeAssignments> homes) {
  std::string buf = "user_id,method,region_id,score,tied\n";
  for (const auto& user : homes) {
    for (const auto& a : user) {
      buf += a.user_id;
      buf.push_back(',');
      buf += std::to_string(method_number(a.method));
      buf.push_back(',');
      if (a.region) buf += std::to_string(*a.region);
      buf.push_back(',');
      append_double(buf, a.score);
      buf += a.tied ? ",1\n" : ",0\n";
    }
    if (buf.size() > (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<HomeAssignments> read_homes_csv(std::istream& in) {
  if (!in) fail(ErrorCode::kIo, "home assignment stream is not readable");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kFormat, "missing home assignment CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "user_id,method,region_id,score,tied")
    fail(ErrorCode::kFormat, "unexpected home assignment header: " + line);

  std::map<std::string, std::pair<HomeAssignments, unsigned>, std::less<>> by_user;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "homes line " + std::to_string(line_no) + ": ";
    std::array<std::string_view, 5> f{};
    std::string_view rest = line;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (i == 4)) fail(ErrorCode::kFormat, where + "expected 5 fields");
      f[i] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    auto to_int = [&](std::string_view s, auto& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) fail(ErrorCode::kFormat, where + "bad number '" + std::string(s) + "'");
    };
    HomeAssignment a;
    a.user_id = std::string(f[0]);
    if (a.user_id.empty()) fail(ErrorCode::kFormat, where + "empty user_id");
    int m = 0;
    to_int(f[1], m);
    if (m < 1 || m > 5) fail(ErrorCode::kFormat, where + "method out of range");
    a.method = static_cast<Method>(m);
    if (!f[2].empty()) {
      RegionId r = 0;
      to_int(f[2], r);
      a.region = r;
    }
    double score = 0.0;
    auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), score);
    if (ec != std::errc{} || p != f[3].data() + f[3].size()) fail(ErrorCode::kFormat, where + "bad score");
    a.score = score;
    if (f[4] != "0" && f[4] != "1") fail(ErrorCode::kFormat, where + "tied must be 0 or 1");
    a.tied = f[4] == "1";
    auto& slot = by_user[a.user_id];
    const unsigned bit = 1u << method_index(a.method);
    if (slot.second & bit) fail(ErrorCode::kFormat, where + "duplicate method for user " + a.user_id);
    slot.second |= bit;
    slot.first[method_index(a.method)] = std::move(a);
  }
  std::vector<HomeAssignments> out;
  out.reserve(by_user.size());
  for (auto& [user, entry] : by_user) {
    if (entry.second != 0x1F) fail(ErrorCode::kFormat, "user " + user + " lacks some of the five methods");
    out.push_back(std::move(entry.first));
  }
  return out;
}

}  // namespace mobitrail
