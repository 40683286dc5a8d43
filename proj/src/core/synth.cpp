// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "mobitrail/error.hpp"
#include "mobitrail/ingest.hpp"
#include "mobitrail/parallel.hpp"
#include "mobitrail/random.hpp"

namespace mobitrail {

namespace {

constexpr int kMaxRedraws = 64;
constexpr std::int64_t kDay = 86400;

std::vector<GeoPoint> default_anchors() {
  return {{40.42, -3.70}, {37.39, -5.98}, {39.47, -0.38}, {43.26, -2.93},
          {41.65, -0.88}, {36.72, -4.42}, {42.88, -8.54}, {38.35, -0.48}};
}

double round_micro(double deg) { return std::round(deg * 1e6) / 1e6; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    fail(ErrorCode::kFormat, "profile key '" + std::string(key) + "': bad value '" + std::string(text) + "'");
  return v;
}

std::vector<double> parse_list(std::string_view key, std::string_view text, char sep) {
  std::vector<double> out;
  while (true) {
    const auto pos = text.find(sep);
    out.push_back(parse_value<double>(key, trim(text.substr(0, pos))));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

class UserGenerator {
 public:
  UserGenerator(const ProfileConfig& profile, const RegionPartition& partition, const SynthOptions& options)
      : profile_(profile), partition_(partition), options_(options) {}

  void run(std::uint64_t seed, UserIndex user, const std::string& user_id, std::vector<Event>& events,
           TruthRow& truth) const {
    Xoshiro256 rng(seed);
    const auto& p = profile_;
    const GeoPoint anchor = p.anchors[rng.index(p.anchors.size())];
    const GeoPoint home = scatter(rng, anchor, p.anchor_sigma_km);
    truth = {user_id, home, *partition_.assign(home)};

    const auto n_events = static_cast<std::uint64_t>(std::max(1.0, std::round(rng.lognormal(p.events_mu, p.events_sigma))));
    const auto n_trips = rng.poisson(p.trip_count_mean);

    struct Trip {
      GeoPoint destination;
      std::int64_t start = 0;
      std::int64_t length = 0;
    };
    std::vector<Trip> trips(n_trips);
    for (auto& t : trips) {
      t.destination = displaced(rng, home, p.trip_distance_mu, p.trip_distance_sigma);
      const auto days = 1 + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(p.trip_max_days)));
      const auto span = std::max<std::int64_t>(1, p.window_days - days + 1);
      t.start = p.window_start + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(span))) * kDay;
      t.length = days * kDay;
    }
    std::vector<GeoPoint> haunts(static_cast<std::size_t>(p.haunt_count));
    for (auto& h : haunts) h = displaced(rng, home, p.haunt_distance_mu, p.haunt_distance_sigma);

    const auto window = static_cast<std::uint64_t>(p.window_days) * kDay;
    events.reserve(events.size() + n_events);
    for (std::uint64_t k = 0; k < n_events; ++k) {
      Event e;
      e.user = user;
      const bool travel = rng.uniform() < p.p_travel;
      if (travel && !trips.empty()) {
        const Trip& t = trips[rng.index(trips.size())];
        e.timestamp = t.start + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(t.length)));
        e.point = scatter(rng, t.destination, p.trip_scatter_km);
      } else {
        e.timestamp = p.window_start + static_cast<std::int64_t>(rng.index(window));
        if (is_night(e.timestamp, p.night)) {
          if (haunts.empty() || rng.uniform() < p.night_home_bias)
            e.point = scatter(rng, home, p.home_jitter_km);
          else
            e.point = scatter(rng, haunts[rng.index(haunts.size())], p.home_sigma_km);
        } else {
          e.point = scatter(rng, home, p.home_sigma_km);
        }
      }
      events.push_back(e);
    }
  }

 private:
  bool acceptable(const GeoPoint& pt) const {
    if (!profile_.territory.contains(pt)) return false;
    if (partition_.assign(pt)) return true;
    if (options_.strict)
      fail(ErrorCode::kInvalidArgument, "partition does not cover generated point (" + std::to_string(pt.lat_deg) +
                                            ", " + std::to_string(pt.lon_deg) + ")");
    return false;
  }

  template <typename Draw>
  GeoPoint place(Xoshiro256& rng, const Draw& draw) const {
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      const GeoPoint raw = draw(rng);
      const GeoPoint pt{round_micro(raw.lat_deg), round_micro(raw.lon_deg)};
      if (acceptable(pt)) return pt;
    }
    fail(ErrorCode::kInvalidArgument, "could not place a point inside the territory covered by the partition");
  }

  // Isotropic Gaussian with per-axis sigma_km.
  GeoPoint scatter(Xoshiro256& rng, const GeoPoint& center, double sigma_km) const {
    return place(rng, [&](Xoshiro256& r) {
      const double dn = r.normal(0.0, sigma_km);
      const double de = r.normal(0.0, sigma_km);
      const double dist = std::hypot(dn, de);
      return dist == 0.0 ? center : destination_point(center, std::atan2(de, dn), dist);
    });
  }

  GeoPoint displaced(Xoshiro256& rng, const GeoPoint& origin, double mu, double sigma) const {
    return place(rng, [&](Xoshiro256& r) {
      const double bearing = 2.0 * std::numbers::pi * r.uniform();
      return destination_point(origin, bearing, r.lognormal(mu, sigma));
    });
  }

  const ProfileConfig& profile_;
  const RegionPartition& partition_;
  const SynthOptions& options_;
};

}  // namespace

void ProfileConfig::validate() const {
  auto prob = [](double v, const char* k) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::kInvalidArgument, std::string(k) + " must be in [0, 1]");
  };
  auto nonneg = [](double v, const char* k) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::kInvalidArgument, std::string(k) + " must be >= 0");
  };
  prob(p_travel, "p_travel");
  prob(night_home_bias, "night_home_bias");
  nonneg(trip_count_mean, "trip_count_mean");
  nonneg(trip_distance_sigma, "trip_distance_sigma");
  nonneg(trip_scatter_km, "trip_scatter_km");
  nonneg(home_sigma_km, "home_sigma_km");
  nonneg(home_jitter_km, "home_jitter_km");
  nonneg(haunt_distance_sigma, "haunt_distance_sigma");
  nonneg(events_sigma, "events_sigma");
  nonneg(anchor_sigma_km, "anchor_sigma_km");
  if (trip_max_days < 1) fail(ErrorCode::kInvalidArgument, "trip_max_days must be >= 1");
  if (haunt_count < 0) fail(ErrorCode::kInvalidArgument, "haunt_count must be >= 0");
  if (window_days < 1) fail(ErrorCode::kInvalidArgument, "window_days must be >= 1");
  if (window_start < 0) fail(ErrorCode::kInvalidArgument, "window_start must be >= 0");
  if (anchors.empty()) fail(ErrorCode::kInvalidArgument, "profile needs at least one anchor");
  if (!(territory.min_lat < territory.max_lat) || !(territory.min_lon < territory.max_lon))
    fail(ErrorCode::kInvalidArgument, "territory is empty");
  for (const auto& a : anchors)
    if (!territory.contains(a)) fail(ErrorCode::kInvalidArgument, "anchor outside territory");
  night.validate();
}

ProfileConfig transaction_profile() {
  ProfileConfig p;
  p.anchors = default_anchors();
  return p;
}

ProfileConfig photo_profile() {
  ProfileConfig p = transaction_profile();
  p.name = "photo";
  p.p_travel = 0.6;
  p.trip_count_mean = 4.0;
  p.trip_distance_mu = std::log(300.0);
  p.night_home_bias = 0.6;
  return p;
}

ProfileConfig preset_profile(std::string_view name) {
  if (name == "transaction") return transaction_profile();
  if (name == "photo") return photo_profile();
  fail(ErrorCode::kInvalidArgument, "unknown profile preset '" + std::string(name) + "'");
}

void set_profile_value(ProfileConfig& p, std::string_view key, std::string_view value) {
  value = trim(value);
  auto dbl = [&] { return parse_value<double>(key, value); };
  auto integer = [&] { return parse_value<int>(key, value); };
  if (key == "name") p.name = std::string(value);
  else if (key == "p_travel") p.p_travel = dbl();
  else if (key == "trip_count_mean") p.trip_count_mean = dbl();
  else if (key == "trip_distance_mu") p.trip_distance_mu = dbl();
  else if (key == "trip_distance_km") p.trip_distance_mu = std::log(dbl());
  else if (key == "trip_distance_sigma") p.trip_distance_sigma = dbl();
  else if (key == "trip_max_days") p.trip_max_days = integer();
  else if (key == "trip_scatter_km") p.trip_scatter_km = dbl();
  else if (key == "home_sigma_km") p.home_sigma_km = dbl();
  else if (key == "home_jitter_km") p.home_jitter_km = dbl();
  else if (key == "night_home_bias") p.night_home_bias = dbl();
  else if (key == "haunt_count") p.haunt_count = integer();
  else if (key == "haunt_distance_mu") p.haunt_distance_mu = dbl();
  else if (key == "haunt_distance_sigma") p.haunt_distance_sigma = dbl();
  else if (key == "events_mu") p.events_mu = dbl();
  else if (key == "events_median") p.events_mu = std::log(dbl());
  else if (key == "events_sigma") p.events_sigma = dbl();
  else if (key == "anchor_sigma_km") p.anchor_sigma_km = dbl();
  else if (key == "window_start") p.window_start = parse_value<std::int64_t>(key, value);
  else if (key == "window_days") p.window_days = integer();
  else if (key == "night_start_hour") p.night.start_hour = integer();
  else if (key == "night_end_hour") p.night.end_hour = integer();
  else if (key == "utc_offset_minutes") p.night.utc_offset_minutes = integer();
  else if (key == "territory") {
    const auto v = parse_list(key, value, ',');
    if (v.size() != 4) fail(ErrorCode::kFormat, "territory needs min_lat,min_lon,max_lat,max_lon");
    p.territory = {v[0], v[1], v[2], v[3]};
  } else if (key == "anchors") {
    p.anchors.clear();
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto pos = rest.find(';');
      const auto item = trim(rest.substr(0, pos));
      if (!item.empty()) {
        const auto v = parse_list(key, item, ':');
        if (v.size() != 2) fail(ErrorCode::kFormat, "anchors need lat:lon;lat:lon");
        p.anchors.push_back({v[0], v[1]});
      }
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
  } else {
    fail(ErrorCode::kFormat, "unknown profile key '" + std::string(key) + "'");
  }
}

ProfileConfig read_profile(std::istream& in, ProfileConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    // ';' also separates anchors, so it only starts a comment at column 0.
    if (!text.empty() && (text.front() == '#' || text.front() == ';')) continue;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = trim(text.substr(0, hash));
    if (text.empty() || text.front() == '[') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::kFormat, "profile line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    if (key == "preset") {
      base = preset_profile(value);
      continue;
    }
    set_profile_value(base, key, value);
  }
  base.validate();
  return base;
}

ProfileConfig load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open profile file: " + path.string());
  return read_profile(in);
}

ProfileConfig resolve_profile(std::string_view name_or_path) {
  if (name_or_path == "transaction" || name_or_path == "photo") return preset_profile(name_or_path);
  return load_profile(std::string(name_or_path));
}

SynthOutput generate(const ProfileConfig& profile, std::uint64_t n_users, const RegionPartition& partition,
                     std::uint64_t seed, const SynthOptions& options) {
  profile.validate();
  if (n_users == 0) fail(ErrorCode::kInvalidArgument, "n_users must be >= 1");
  if (n_users > std::numeric_limits<UserIndex>::max()) fail(ErrorCode::kInvalidArgument, "too many users");

  const std::size_t width = std::to_string(n_users - 1).size();
  SynthOutput out;
  for (std::uint64_t i = 0; i < n_users; ++i) {
    const std::string digits = std::to_string(i);
    out.events.intern("u" + std::string(width - digits.size(), '0') + digits);
  }
  out.truth.resize(n_users);
  std::vector<std::vector<Event>> per_user(n_users);
  UserGenerator gen(profile, partition, options);
  parallel_for(n_users, options.threads, [&](std::size_t i) {
    gen.run(split_seed(seed, i), static_cast<UserIndex>(i), out.events.users[i], per_user[i], out.truth[i]);
    std::sort(per_user[i].begin(), per_user[i].end(), canonical_less);
  });
  std::size_t total = 0;
  for (const auto& v : per_user) total += v.size();
  out.events.events.reserve(total);
  for (auto& v : per_user) {
    out.events.events.insert(out.events.events.end(), v.begin(), v.end());
    std::vector<Event>().swap(v);
  }
  return out;
}

void write_truth_csv(std::ostream& out, std::span<const TruthRow> truth) {
  std::string buf = "user_id,home_lat,home_lon,home_region_id\n";
  for (const auto& t : truth) {
    buf += t.user_id;
    buf.push_back(',');
    append_double(buf, t.home_point.lat_deg);
    buf.push_back(',');
    append_double(buf, t.home_point.lon_deg);
    buf.push_back(',');
    buf += std::to_string(t.home_region_id);
    buf.push_back('\n');
  }
  out << buf;
}

}  // namespace mobitrail
