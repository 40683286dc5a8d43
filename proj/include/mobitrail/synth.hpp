// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobitrail/homedetect.hpp"
#include "mobitrail/partition.hpp"
#include "mobitrail/trace.hpp"

namespace mobitrail {

/// Behavioural profile of a synthetic cohort. Defaults are the "transaction" preset.
/// All constants are calibration knobs for the generator, not measured values.
///
/// Per event: with probability p_travel it belongs to a trip (uniformly chosen among the
/// user's trips) and lands near the trip destination during the trip's days. Otherwise it is
/// timestamped uniformly over the window; night events land at home with probability
/// night_home_bias (else at one of the user's haunts) and day events scatter around home.
struct ProfileConfig {
  std::string name = "transaction";

  double p_travel = 0.2;
  double trip_count_mean = 2.0;      // Poisson mean of trips per user
  double trip_distance_mu = 5.0106352940962555;  // ln(150 km)
  double trip_distance_sigma = 1.0;
  int trip_max_days = 7;             // trip length is uniform in [1, trip_max_days] days
  double trip_scatter_km = 2.0;

  double home_sigma_km = 3.0;        // daytime scatter around home
  double home_jitter_km = 0.05;      // scatter of events at the residence itself
  double night_home_bias = 0.9;
  int haunt_count = 2;               // non-home night places
  double haunt_distance_mu = 2.995732273553991;  // ln(20 km)
  double haunt_distance_sigma = 0.5;

  double events_mu = 3.6888794541139363;  // ln(40)
  double events_sigma = 0.8;

  double anchor_sigma_km = 20.0;     // scatter of homes around their urban anchor
  std::vector<GeoPoint> anchors;
  BoundingBox territory{35.0, -10.0, 45.0, 0.0};
  std::int64_t window_start = 1293840000;  // 2011-01-01T00:00:00Z
  int window_days = 365;
  NightWindow night;

  void validate() const;
};

ProfileConfig transaction_profile();
ProfileConfig photo_profile();
/// "transaction", "photo", or nothing else.
ProfileConfig preset_profile(std::string_view name);

/// key = value lines; '#'/';' comments; [section] lines ignored. `preset = photo` starts from
/// that preset; later keys override. Unknown keys throw Error(kFormat).
ProfileConfig read_profile(std::istream& in, ProfileConfig base = transaction_profile());
ProfileConfig load_profile(const std::filesystem::path& path);
/// Preset name or path to a profile file.
ProfileConfig resolve_profile(std::string_view name_or_path);
/// Applies one key = value assignment.
void set_profile_value(ProfileConfig& profile, std::string_view key, std::string_view value);

struct TruthRow {
  std::string user_id;
  GeoPoint home_point;
  RegionId home_region_id = 0;
};

struct SynthOutput {
  EventSet events;  // user order == user_id order; region_id unset
  std::vector<TruthRow> truth;
};

struct SynthOptions {
  bool strict = false;  // fail on the first point the partition does not cover instead of redrawing
  unsigned threads = 1;
};

/// Deterministic in (profile, n_users, partition, seed); independent of thread count.
/// Coordinates are rounded to 1e-6 degrees so CSV output round-trips exactly.
SynthOutput generate(const ProfileConfig& profile, std::uint64_t n_users, const RegionPartition& partition,
                     std::uint64_t seed, const SynthOptions& options = {});

/// `user_id,home_lat,home_lon,home_region_id`
void write_truth_csv(std::ostream& out, std::span<const TruthRow> truth);

}  // namespace mobitrail
