// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <numbers>

namespace mobitrail {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Position in decimal degrees. Valid points have lat in [-90, 90] and lon in [-180, 180).
struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;

  friend auto operator<=>(const GeoPoint&, const GeoPoint&) = default;
};

inline bool is_valid(const GeoPoint& p) noexcept {
  return p.lat_deg >= -90.0 && p.lat_deg <= 90.0 && p.lon_deg >= -180.0 && p.lon_deg < 180.0;
}

/// Wraps any finite longitude into [-180, 180).
double normalize_lon(double lon_deg) noexcept;

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

struct UnitVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

UnitVector to_unit_vector(const GeoPoint& p) noexcept;

/// Projects a (not necessarily unit) Cartesian vector back onto the sphere.
GeoPoint from_vector(const UnitVector& v) noexcept;

/// Point reached by travelling `distance_km` from `origin` along `bearing_rad` (clockwise from north).
GeoPoint destination_point(const GeoPoint& origin, double bearing_rad, double distance_km) noexcept;

/// Pairwise (cascade) summation of f(0) .. f(n-1). Result depends only on n and the values in index order.
template <typename F>
double pairwise_sum(std::size_t begin, std::size_t end, const F& f) {
  constexpr std::size_t kLeaf = 8;
  if (end - begin <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

}  // namespace mobitrail
