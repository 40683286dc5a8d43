// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/gyration.hpp"

#include <algorithm>
#include <cmath>

#include "mobitrail/error.hpp"
#include "mobitrail/ingest.hpp"
#include "mobitrail/log.hpp"
#include "mobitrail/parallel.hpp"

namespace mobitrail {

namespace {

constexpr double kDegenerateNorm = 1e-12;

bool single_location(const TraceView& t) {
  const GeoPoint& first = t.events.front().point;
  return std::all_of(t.events.begin(), t.events.end(), [&](const Event& e) { return e.point == first; });
}

}  // namespace

CenterOfMass compute_center_of_mass(const TraceView& trace) {
  if (trace.events.empty()) fail(ErrorCode::kInvalidArgument, "center of mass of an empty trace");
  if (single_location(trace)) return {trace.events.front().point, false};

  thread_local std::vector<UnitVector> scratch;
  scratch.resize(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) scratch[i] = to_unit_vector(trace.events[i].point);
  const auto n = trace.size();
  const double inv = 1.0 / static_cast<double>(n);
  const UnitVector mean{pairwise_sum(0, n, [&](std::size_t i) { return scratch[i].x; }) * inv,
                        pairwise_sum(0, n, [&](std::size_t i) { return scratch[i].y; }) * inv,
                        pairwise_sum(0, n, [&](std::size_t i) { return scratch[i].z; }) * inv};
  const double norm = std::sqrt(mean.x * mean.x + mean.y * mean.y + mean.z * mean.z);
  if (norm < kDegenerateNorm) {
    log::warn("degenerate center of mass for user '" + std::string(trace.user_id) +
              "': antipodal mass, using first event");
    return {trace.events.front().point, true};
  }
  return {from_vector(mean), false};
}

GeoPoint center_of_mass(const TraceView& trace) { return compute_center_of_mass(trace).point; }

namespace {

double rg_about(const TraceView& trace, const GeoPoint& com) {
  const auto n = trace.size();
  const double sum_sq = pairwise_sum(0, n, [&](std::size_t i) {
    const double d = haversine_km(trace.events[i].point, com);
    return d * d;
  });
  return std::sqrt(sum_sq / static_cast<double>(n));
}

}  // namespace

double radius_of_gyration(const TraceView& trace) {
  const auto com = compute_center_of_mass(trace);
  if (trace.size() == 1 || single_location(trace)) return 0.0;
  return rg_about(trace, com.point);
}

GyrationResult gyration(const TraceView& trace) {
  const auto com = compute_center_of_mass(trace);
  const double rg = single_location(trace) ? 0.0 : rg_about(trace, com.point);
  return {std::string(trace.user_id), com.point, rg, trace.size()};
}

std::vector<GyrationResult> compute_gyration(const TraceSet& traces, unsigned threads) {
  std::vector<GyrationResult> out(traces.size());
  parallel_for(traces.size(), threads, [&](std::size_t i) { out[i] = gyration(traces[i]); });
  return out;
}

EcdfSeries ecdf(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "ecdf of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  EcdfSeries out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.sorted_values.push_back(sorted[i]);
    out.cumulative_fraction.push_back(static_cast<double>(i + 1) / n);
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::kInvalidArgument, "quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxplotStats boxplot_stats(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "boxplot of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxplotStats b;
  b.q1 = quantile_sorted(sorted, 0.25);
  b.median = quantile_sorted(sorted, 0.5);
  b.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = *std::lower_bound(sorted.begin(), sorted.end(), lo_fence);
  b.whisker_high = *(std::upper_bound(sorted.begin(), sorted.end(), hi_fence) - 1);
  // An interpolated quartile can lie between an outlier and the nearest inlier; keep whiskers outside the box.
  b.whisker_low = std::min(b.whisker_low, b.q1);
  b.whisker_high = std::max(b.whisker_high, b.q3);
  b.mean = pairwise_sum(0, sorted.size(), [&](std::size_t i) { return sorted[i]; }) /
           static_cast<double>(sorted.size());
  return b;
}

DistributionSummary summarize(std::span<const double> values) {
  DistributionSummary s;
  s.count = values.size();
  s.ecdf = ecdf(values);
  s.boxplot = boxplot_stats(values);
  s.mean = s.boxplot.mean;
  s.median = s.boxplot.median;
  std::vector<double> logs;
  for (double v : values)
    if (v > 0.0) logs.push_back(std::log(v));
  s.log_count = logs.size();
  if (!logs.empty()) s.log_boxplot = boxplot_stats(logs);
  return s;
}

nlohmann::json to_json(const EcdfSeries& e) {
  return {{"values", e.sorted_values}, {"fractions", e.cumulative_fraction}};
}

nlohmann::json to_json(const BoxplotStats& b) {
  return {{"q1", b.q1},
          {"median", b.median},
          {"q3", b.q3},
          {"whisker_low", b.whisker_low},
          {"whisker_high", b.whisker_high},
          {"mean", b.mean}};
}

nlohmann::json to_json(const DistributionSummary& s) {
  nlohmann::json j{{"count", s.count},         {"mean", s.mean},
                   {"median", s.median},       {"ecdf", to_json(s.ecdf)},
                   {"boxplot", to_json(s.boxplot)}, {"ln_count", s.log_count}};
  j["ln_boxplot"] = s.log_count > 0 ? to_json(s.log_boxplot) : nlohmann::json(nullptr);
  return j;
}

void write_gyration_csv(std::ostream& out, std::span<const GyrationResult> results) {
  std::string buf = "user_id,com_lat,com_lon,r_g_km,n_events\n";
  for (const auto& r : results) {
    buf += r.user_id;
    buf.push_back(',');
    append_double(buf, r.center_of_mass.lat_deg);
    buf.push_back(',');
    append_double(buf, r.center_of_mass.lon_deg);
    buf.push_back(',');
    append_double(buf, r.r_g_km);
    buf.push_back(',');
    buf += std::to_string(r.n_events);
    buf.push_back('\n');
    if (buf.size() > (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace mobitrail
