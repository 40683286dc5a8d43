// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mobitrail/geo.hpp"
#include "mobitrail/trace.hpp"

namespace mobitrail {

struct RegionMeta {
  std::string name;
  std::string country_code;  // ISO-3166 alpha-2; empty when unknown
};

/// Half-open box: min <= coord < max on both axes.
struct BoundingBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;

  bool contains(const GeoPoint& p) const noexcept {
    return p.lat_deg >= min_lat && p.lat_deg < max_lat && p.lon_deg >= min_lon && p.lon_deg < max_lon;
  }
};

/// One lookup region. When `ring` is empty the region is exactly its bounding box,
/// otherwise it is the even-odd interior of `ring` (bbox is used as a prefilter).
struct LookupRegion {
  RegionId id = 0;
  RegionMeta meta;
  BoundingBox bbox;
  std::vector<GeoPoint> ring;
};

struct GridCell {
  std::int64_t row = 0;  // floor(lat / cell_size)
  std::int64_t col = 0;  // floor(lon / cell_size)
};

bool point_in_ring(const GeoPoint& p, const std::vector<GeoPoint>& ring) noexcept;

class RegionPartition {
 public:
  enum class Kind { kGrid, kLookup };

  static RegionPartition grid(double cell_size_deg);
  /// Overlaps resolve to the smallest region_id.
  static RegionPartition lookup(std::vector<LookupRegion> regions);
  /// JSONL: {"region_id", "name", "country_code", "bbox": [min_lat, min_lon, max_lat, max_lon]}
  /// or {"region_id", "name", "country_code", "polygon": [[lat, lon], ...]}.
  static RegionPartition read_lookup(std::istream& in);
  static RegionPartition load_lookup(const std::filesystem::path& path);
  /// "grid:<cell_deg>" or "lookup:<path>".
  static RegionPartition from_spec(std::string_view spec);

  Kind kind() const noexcept { return kind_; }
  double cell_size_deg() const noexcept { return cell_size_; }

  std::optional<RegionId> assign(const GeoPoint& p) const noexcept;
  bool contains(RegionId id) const noexcept;
  /// Name and country of a region. Grid cells carry a synthetic name and no country.
  std::optional<RegionMeta> meta(RegionId id) const;
  std::optional<std::string> country_of(RegionId id) const;

  // Grid-only helpers.
  GridCell cell_of(RegionId id) const noexcept;
  RegionId cell_id(GridCell cell) const noexcept;
  GeoPoint cell_center(RegionId id) const noexcept;

  const std::vector<LookupRegion>& regions() const noexcept { return regions_; }

 private:
  RegionPartition() = default;
  void build_index();

  Kind kind_ = Kind::kGrid;
  double cell_size_ = 0.0;
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;

  std::vector<LookupRegion> regions_;  // sorted by id
  std::unordered_map<RegionId, std::size_t> by_id_;
  BoundingBox extent_;
  std::int64_t index_rows_ = 0;
  std::int64_t index_cols_ = 0;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

}  // namespace mobitrail
