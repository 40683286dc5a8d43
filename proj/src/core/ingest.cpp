// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mobitrail/error.hpp"
#include "mobitrail/log.hpp"
#include "mobitrail/parallel.hpp"

namespace mobitrail {

namespace {

enum class TimeStyle { kUnknown, kUnix, kIso };

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_unix(std::string_view s, std::int64_t& out) { return parse_number(s, out); }

// Resolves the timestamp style on first success and then sticks to it.
bool parse_timestamp(std::string_view s, TimeStyle& style, std::int64_t& out) {
  if (style != TimeStyle::kIso && parse_unix(s, out)) {
    style = TimeStyle::kUnix;
    return true;
  }
  if (style != TimeStyle::kUnix) {
    if (auto t = parse_iso8601(s)) {
      style = TimeStyle::kIso;
      out = *t;
      return true;
    }
  }
  return false;
}

struct Fields {
  std::string_view user;
  std::string_view timestamp;
  std::string_view lat;
  std::string_view lon;
  std::optional<std::string_view> region;
};

// Validates a parsed record and appends it; returns an error message or empty on success.
std::string add_event(EventSet& set, const Fields& f, TimeStyle& style) {
  const auto user = trim(unquote(trim(f.user)));
  if (user.empty()) return "empty user_id";
  std::int64_t ts = 0;
  if (!parse_timestamp(trim(unquote(trim(f.timestamp))), style, ts)) return "bad timestamp";
  if (ts < 0) return "negative timestamp";
  GeoPoint p;
  if (!parse_number(trim(f.lat), p.lat_deg) || !parse_number(trim(f.lon), p.lon_deg)) return "bad coordinate";
  if (p.lon_deg == 180.0) p.lon_deg = -180.0;
  if (!is_valid(p)) return "coordinate out of range";
  std::optional<RegionId> region;
  if (f.region) {
    const auto r = trim(*f.region);
    if (!r.empty()) {
      RegionId id = 0;
      if (!parse_number(r, id)) return "bad region_id";
      region = id;
    }
  }
  set.events.push_back(Event{set.intern(user), ts, p, region});
  return {};
}

struct CsvLayout {
  int user = -1, timestamp = -1, lat = -1, lon = -1, region = -1;
  int width = 0;
};

CsvLayout parse_header(std::string_view header) {
  CsvLayout layout;
  int col = 0;
  std::size_t start = 0;
  while (true) {
    const auto end = header.find(',', start);
    const auto name = trim(unquote(trim(header.substr(start, end == std::string_view::npos ? end : end - start))));
    if (name == "user_id") layout.user = col;
    else if (name == "timestamp") layout.timestamp = col;
    else if (name == "lat") layout.lat = col;
    else if (name == "lon") layout.lon = col;
    else if (name == "region_id") layout.region = col;
    ++col;
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  layout.width = col;
  if (layout.user < 0 || layout.timestamp < 0 || layout.lat < 0 || layout.lon < 0)
    fail(ErrorCode::kFormat, "CSV header must name user_id,timestamp,lat,lon[,region_id]");
  return layout;
}

std::string parse_csv_line(EventSet& set, std::string_view line, const CsvLayout& layout, TimeStyle& style) {
  std::array<std::string_view, 16> cols{};
  int n = 0;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(',', start);
    if (n < static_cast<int>(cols.size())) cols[static_cast<std::size_t>(n)] = line.substr(start, end == std::string_view::npos ? end : end - start);
    ++n;
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (n != layout.width) return "expected " + std::to_string(layout.width) + " fields, got " + std::to_string(n);
  Fields f{cols[static_cast<std::size_t>(layout.user)], cols[static_cast<std::size_t>(layout.timestamp)],
           cols[static_cast<std::size_t>(layout.lat)], cols[static_cast<std::size_t>(layout.lon)], std::nullopt};
  if (layout.region >= 0) f.region = cols[static_cast<std::size_t>(layout.region)];
  return add_event(set, f, style);
}

std::string scalar_text(const nlohmann::json& v, std::string& storage) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) {
    storage.clear();
    append_double(storage, v.get<double>());
    return storage;
  }
  return "\x01";  // never parses
}

std::string parse_jsonl_line(EventSet& set, std::string_view line, TimeStyle& style) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return "not a JSON object";
  for (const char* key : {"user_id", "timestamp", "lat", "lon"})
    if (!j.contains(key)) return std::string("missing field ") + key;
  std::string scratch;
  const std::string user = scalar_text(j["user_id"], scratch);
  const std::string ts = scalar_text(j["timestamp"], scratch);
  const std::string lat = scalar_text(j["lat"], scratch);
  const std::string lon = scalar_text(j["lon"], scratch);
  std::string region;
  Fields f{user, ts, lat, lon, std::nullopt};
  if (j.contains("region_id") && !j["region_id"].is_null()) {
    region = scalar_text(j["region_id"], scratch);
    f.region = region;
  }
  return add_event(set, f, style);
}

}  // namespace

nlohmann::json to_json(const IngestReport& r) {
  return {{"total_lines", r.total_lines},   {"parsed", r.parsed},
          {"parse_errors", r.parse_errors}, {"pruned_unresolvable", r.pruned_unresolvable},
          {"users_in", r.users_in},         {"users_after_filter", r.users_after_filter}};
}

std::optional<std::int64_t> parse_iso8601(std::string_view s) noexcept {
  auto digits = [&](std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    out = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      out = out * 10 + (s[i] - '0');
    }
    return true;
  };
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!digits(0, 4, y) || s.size() < 19 || s[4] != '-' || !digits(5, 2, mo) || s[7] != '-' || !digits(8, 2, d) ||
      (s[10] != 'T' && s[10] != ' ') || !digits(11, 2, h) || s[13] != ':' || !digits(14, 2, mi) || s[16] != ':' ||
      !digits(17, 2, sec))
    return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
    ++pos;
    const std::size_t frac_start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == frac_start) return std::nullopt;
  }
  int offset_min = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '-' ? -1 : 1;
      int oh = 0, om = 0;
      if (!digits(pos + 1, 2, oh)) return std::nullopt;
      std::size_t next = pos + 3;
      if (next < s.size() && s[next] == ':') ++next;
      if (!digits(next, 2, om)) return std::nullopt;
      if (oh > 23 || om > 59) return std::nullopt;
      offset_min = sign * (oh * 60 + om);
      pos = next + 2;
    }
  }
  if (pos != s.size()) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec - offset_min * 60;
}

ParseResult parse_events(std::istream& in, InputFormat format) {
  if (!in) fail(ErrorCode::kIo, "input stream is not readable");
  ParseResult result;
  TimeStyle style = TimeStyle::kUnknown;
  std::string line;
  std::uint64_t line_no = 0;
  CsvLayout layout;
  if (format == InputFormat::kCsv) {
    bool have_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      layout = parse_header(trim(line));
      have_header = true;
      break;
    }
    if (!have_header) fail(ErrorCode::kFormat, "missing CSV header");
  }
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    ++result.report.total_lines;
    std::string problem = format == InputFormat::kCsv ? parse_csv_line(result.events, text, layout, style)
                                                      : parse_jsonl_line(result.events, text, style);
    if (problem.empty()) {
      ++result.report.parsed;
      continue;
    }
    ++result.report.parse_errors;
    if (result.issues.size() < kMaxRecordedIssues) {
      log::warn("line " + std::to_string(line_no) + ": " + problem);
      result.issues.push_back({line_no, std::move(problem)});
    }
  }
  if (in.bad()) fail(ErrorCode::kIo, "read error on input stream");
  if (result.report.parse_errors > result.issues.size())
    log::warn(std::to_string(result.report.parse_errors - result.issues.size()) + " further malformed lines skipped");
  return result;
}

PruneResult prune(std::vector<Event> events, const RegionPartition& partition) {
  EventSet set;
  set.events = std::move(events);
  PruneResult out;
  out.dropped = prune(set, partition);
  out.kept = std::move(set.events);
  return out;
}

std::uint64_t prune(EventSet& set, const RegionPartition& partition) {
  auto resolve = [&](Event& e) {
    if (e.region && partition.contains(*e.region)) return true;
    e.region = partition.assign(e.point);
    return e.region.has_value();
  };
  const auto before = set.events.size();
  std::size_t write = 0;
  for (std::size_t i = 0; i < set.events.size(); ++i) {
    Event e = set.events[i];
    if (resolve(e)) set.events[write++] = e;
  }
  set.events.resize(write);
  return before - write;
}

TraceSet group_traces(EventSet set, unsigned threads) {
  const std::size_t n_users = set.users.size();
  std::vector<std::uint64_t> counts(n_users, 0);
  for (const auto& e : set.events) ++counts[e.user];

  // Rank users by name; drop users left without events.
  std::vector<UserIndex> order;
  order.reserve(n_users);
  for (UserIndex u = 0; u < n_users; ++u)
    if (counts[u] > 0) order.push_back(u);
  std::sort(order.begin(), order.end(), [&](UserIndex a, UserIndex b) { return set.users[a] < set.users[b]; });
  std::vector<UserIndex> rank(n_users, 0);
  std::vector<std::string> users;
  users.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = static_cast<UserIndex>(r);
    users.push_back(std::move(set.users[order[r]]));
  }

  // Counting sort into per-user buckets, then canonical sort inside each bucket.
  std::vector<std::size_t> offsets(users.size() + 1, 0);
  for (std::size_t r = 0; r < order.size(); ++r) offsets[r + 1] = offsets[r] + counts[order[r]];
  std::vector<Event> grouped(set.events.size());
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& e : set.events) {
      Event g = e;
      g.user = rank[e.user];
      grouped[cursor[g.user]++] = g;
    }
  }
  set.events.clear();
  set.events.shrink_to_fit();
  parallel_for(users.size(), threads, [&](std::size_t u) {
    std::sort(grouped.begin() + static_cast<std::ptrdiff_t>(offsets[u]),
              grouped.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]), canonical_less);
  });
  return TraceSet::from_sorted(std::move(users), std::move(grouped));
}

TraceSet apply_filter(TraceSet traces, const FilterPolicy& policy, const ConsensusCountries* homes) {
  if (policy.consensus_country && homes == nullptr)
    fail(ErrorCode::kInvalidArgument, "consensus-country filter requires per-user home assignments");
  const std::size_t n = traces.size();
  double mean = 0.0;
  if (policy.above_average && n > 0)
    mean = static_cast<double>(traces.event_count()) / static_cast<double>(n);
  std::vector<bool> keep(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = traces[i];
    const auto count = static_cast<std::uint64_t>(t.size());
    bool ok = count >= policy.min_events;
    if (ok && policy.above_average) ok = static_cast<double>(count) > mean;
    if (ok && policy.consensus_country) {
      auto it = homes->find(std::string(t.user_id));
      ok = it != homes->end() && it->second == *policy.consensus_country;
    }
    keep[i] = ok;
  }
  return std::move(traces).select(keep);
}

void append_double(std::string& out, double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), ptr);
}

namespace {

void append_event_row(std::string& buf, std::string_view user, const Event& e) {
  std::array<char, 24> num{};
  buf.append(user);
  buf.push_back(',');
  auto [p1, ec1] = std::to_chars(num.data(), num.data() + num.size(), e.timestamp);
  buf.append(num.data(), p1);
  buf.push_back(',');
  append_double(buf, e.point.lat_deg);
  buf.push_back(',');
  append_double(buf, e.point.lon_deg);
  buf.push_back(',');
  if (e.region) {
    auto [p2, ec2] = std::to_chars(num.data(), num.data() + num.size(), *e.region);
    buf.append(num.data(), p2);
  }
  buf.push_back('\n');
}

constexpr std::size_t kFlushBytes = 1 << 20;

}  // namespace

void write_events_csv(std::ostream& out, const TraceSet& traces) {
  std::string buf = "user_id,timestamp,lat,lon,region_id\n";
  for (std::size_t u = 0; u < traces.size(); ++u) {
    const auto t = traces[u];
    for (const auto& e : t.events) {
      append_event_row(buf, t.user_id, e);
      if (buf.size() > kFlushBytes) {
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        buf.clear();
      }
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_events_csv(std::ostream& out, const EventSet& set) {
  std::string buf = "user_id,timestamp,lat,lon,region_id\n";
  for (const auto& e : set.events) {
    append_event_row(buf, set.users[e.user], e);
    if (buf.size() > kFlushBytes) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace mobitrail
