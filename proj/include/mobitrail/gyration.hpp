// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobitrail/geo.hpp"
#include "mobitrail/trace.hpp"

namespace mobitrail {

struct CenterOfMass {
  GeoPoint point;
  bool degenerate = false;  // mean vector vanished; point is the first event
};

/// Spherical centroid of per-event unit vectors, each event weighted equally.
CenterOfMass compute_center_of_mass(const TraceView& trace);
GeoPoint center_of_mass(const TraceView& trace);

/// Root-mean-square haversine distance of the events from their spherical centroid, in km.
double radius_of_gyration(const TraceView& trace);

struct GyrationResult {
  std::string user_id;
  GeoPoint center_of_mass;
  double r_g_km = 0.0;
  std::size_t n_events = 0;
};

GyrationResult gyration(const TraceView& trace);
std::vector<GyrationResult> compute_gyration(const TraceSet& traces, unsigned threads = 1);

/// Right-continuous ECDF over the distinct values: fraction[i] = #(x <= values[i]) / n.
struct EcdfSeries {
  std::vector<double> sorted_values;
  std::vector<double> cumulative_fraction;
};

EcdfSeries ecdf(std::span<const double> values);

struct BoxplotStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  double mean = 0.0;
};

/// Type-7 quantile (linear interpolation between order statistics) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Quartiles by type-7 interpolation; whiskers at the most extreme data within 1.5 IQR of the box.
BoxplotStats boxplot_stats(std::span<const double> values);

/// Payload for ECDF/boxplot plots of a population of r_g values.
struct DistributionSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  EcdfSeries ecdf;
  BoxplotStats boxplot;
  std::size_t log_count = 0;  // values > 0 entering the ln-boxplot
  BoxplotStats log_boxplot;
};

DistributionSummary summarize(std::span<const double> values);

nlohmann::json to_json(const EcdfSeries& e);
nlohmann::json to_json(const BoxplotStats& b);
nlohmann::json to_json(const DistributionSummary& s);

/// `user_id,com_lat,com_lon,r_g_km,n_events`
void write_gyration_csv(std::ostream& out, std::span<const GyrationResult> results);

}  // namespace mobitrail
