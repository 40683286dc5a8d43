// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/geo.hpp"

#include <algorithm>

namespace mobitrail {

double normalize_lon(double lon_deg) noexcept {
  double l = std::fmod(lon_deg + 180.0, 360.0);
  if (l < 0.0) l += 360.0;
  l -= 180.0;
  return l >= 180.0 ? -180.0 : l;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  if (a == b) return 0.0;
  const double lat1 = a.lat_deg * kDegToRad;
  const double lat2 = b.lat_deg * kDegToRad;
  const double s_lat = std::sin((lat2 - lat1) * 0.5);
  const double s_lon = std::sin((b.lon_deg - a.lon_deg) * kDegToRad * 0.5);
  double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

UnitVector to_unit_vector(const GeoPoint& p) noexcept {
  const double lat = p.lat_deg * kDegToRad;
  const double lon = p.lon_deg * kDegToRad;
  const double c = std::cos(lat);
  return {c * std::cos(lon), c * std::sin(lon), std::sin(lat)};
}

GeoPoint from_vector(const UnitVector& v) noexcept {
  const double lat = std::atan2(v.z, std::hypot(v.x, v.y)) * kRadToDeg;
  const double lon = std::atan2(v.y, v.x) * kRadToDeg;
  return {std::clamp(lat, -90.0, 90.0), normalize_lon(lon)};
}

GeoPoint destination_point(const GeoPoint& origin, double bearing_rad, double distance_km) noexcept {
  const double delta = distance_km / kEarthRadiusKm;
  const double lat1 = origin.lat_deg * kDegToRad;
  const double lon1 = origin.lon_deg * kDegToRad;
  const double sin_lat2 =
      std::sin(lat1) * std::cos(delta) + std::cos(lat1) * std::sin(delta) * std::cos(bearing_rad);
  const double lat2 = std::asin(std::clamp(sin_lat2, -1.0, 1.0));
  const double lon2 = lon1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(lat1),
                                        std::cos(delta) - std::sin(lat1) * sin_lat2);
  return {lat2 * kRadToDeg, normalize_lon(lon2 * kRadToDeg)};
}

}  // namespace mobitrail
