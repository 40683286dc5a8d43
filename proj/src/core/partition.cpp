// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "mobitrail/error.hpp"

namespace mobitrail {

namespace {

constexpr double kMinCellDeg = 1e-6;
constexpr std::int64_t kIndexDim = 64;

std::int64_t floor_div(double value, double cell) { return static_cast<std::int64_t>(std::floor(value / cell)); }

std::int64_t half_rows(double cell) { return static_cast<std::int64_t>(std::ceil(90.0 / cell)); }
std::int64_t half_cols(double cell) { return static_cast<std::int64_t>(std::ceil(180.0 / cell)); }

}  // namespace

bool point_in_ring(const GeoPoint& p, const std::vector<GeoPoint>& ring) noexcept {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[j];
    if ((a.lat_deg > p.lat_deg) != (b.lat_deg > p.lat_deg)) {
      const double lon_cross =
          (b.lon_deg - a.lon_deg) * (p.lat_deg - a.lat_deg) / (b.lat_deg - a.lat_deg) + a.lon_deg;
      if (p.lon_deg < lon_cross) inside = !inside;
    }
  }
  return inside;
}

RegionPartition RegionPartition::grid(double cell_size_deg) {
  if (!(cell_size_deg >= kMinCellDeg) || !(cell_size_deg <= 360.0))
    fail(ErrorCode::kInvalidArgument, "grid cell size must be in [1e-6, 360] degrees");
  RegionPartition p;
  p.kind_ = Kind::kGrid;
  p.cell_size_ = cell_size_deg;
  p.rows_ = 2 * half_rows(cell_size_deg) + 1;  // +1: the row holding lat = +90 exactly
  p.cols_ = 2 * half_cols(cell_size_deg);
  return p;
}

RegionPartition RegionPartition::lookup(std::vector<LookupRegion> regions) {
  if (regions.empty()) fail(ErrorCode::kInvalidArgument, "lookup partition has no regions");
  std::sort(regions.begin(), regions.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  RegionPartition p;
  p.kind_ = Kind::kLookup;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    auto& r = regions[i];
    if (!r.ring.empty()) {
      if (r.ring.size() < 3) fail(ErrorCode::kFormat, "region " + std::to_string(r.id) + ": polygon needs >= 3 vertices");
      BoundingBox b{90.0, 180.0, -90.0, -180.0};
      for (const auto& v : r.ring) {
        if (!is_valid(v)) fail(ErrorCode::kFormat, "region " + std::to_string(r.id) + ": invalid polygon vertex");
        b.min_lat = std::min(b.min_lat, v.lat_deg);
        b.max_lat = std::max(b.max_lat, v.lat_deg);
        b.min_lon = std::min(b.min_lon, v.lon_deg);
        b.max_lon = std::max(b.max_lon, v.lon_deg);
      }
      // Polygon prefilter must admit boundary points.
      b.max_lat = std::nextafter(b.max_lat, std::numeric_limits<double>::infinity());
      b.max_lon = std::nextafter(b.max_lon, std::numeric_limits<double>::infinity());
      r.bbox = b;
    }
    if (!(r.bbox.min_lat < r.bbox.max_lat) || !(r.bbox.min_lon < r.bbox.max_lon))
      fail(ErrorCode::kFormat, "region " + std::to_string(r.id) + ": empty bounding box");
    if (!p.by_id_.emplace(r.id, i).second)
      fail(ErrorCode::kFormat, "duplicate region_id " + std::to_string(r.id));
  }
  p.regions_ = std::move(regions);
  p.build_index();
  return p;
}

void RegionPartition::build_index() {
  extent_ = regions_.front().bbox;
  for (const auto& r : regions_) {
    extent_.min_lat = std::min(extent_.min_lat, r.bbox.min_lat);
    extent_.min_lon = std::min(extent_.min_lon, r.bbox.min_lon);
    extent_.max_lat = std::max(extent_.max_lat, r.bbox.max_lat);
    extent_.max_lon = std::max(extent_.max_lon, r.bbox.max_lon);
  }
  index_rows_ = kIndexDim;
  index_cols_ = kIndexDim;
  buckets_.assign(static_cast<std::size_t>(index_rows_ * index_cols_), {});
  const double dlat = (extent_.max_lat - extent_.min_lat) / static_cast<double>(index_rows_);
  const double dlon = (extent_.max_lon - extent_.min_lon) / static_cast<double>(index_cols_);
  auto clamp_row = [&](double lat) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((lat - extent_.min_lat) / dlat)), 0,
                                    index_rows_ - 1);
  };
  auto clamp_col = [&](double lon) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((lon - extent_.min_lon) / dlon)), 0,
                                    index_cols_ - 1);
  };
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const auto& b = regions_[i].bbox;
    for (auto r = clamp_row(b.min_lat); r <= clamp_row(b.max_lat); ++r)
      for (auto c = clamp_col(b.min_lon); c <= clamp_col(b.max_lon); ++c)
        buckets_[static_cast<std::size_t>(r * index_cols_ + c)].push_back(static_cast<std::uint32_t>(i));
  }
}

RegionPartition RegionPartition::read_lookup(std::istream& in) {
  std::vector<LookupRegion> regions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "lookup line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kFormat, where + e.what());
    }
    if (!j.is_object() || !j.contains("region_id") || !j["region_id"].is_number_integer())
      fail(ErrorCode::kFormat, where + "missing integer region_id");
    LookupRegion r;
    r.id = j["region_id"].get<RegionId>();
    r.meta.name = j.value("name", std::string{});
    r.meta.country_code = j.value("country_code", std::string{});
    try {
      if (j.contains("polygon")) {
        for (const auto& v : j["polygon"]) r.ring.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        if (r.ring.size() > 1 && r.ring.front() == r.ring.back()) r.ring.pop_back();
      } else if (j.contains("bbox")) {
        const auto& b = j["bbox"];
        if (!b.is_array() || b.size() != 4) fail(ErrorCode::kFormat, where + "bbox must have 4 numbers");
        r.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      } else {
        fail(ErrorCode::kFormat, where + "region needs bbox or polygon");
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kFormat, where + e.what());
    }
    regions.push_back(std::move(r));
  }
  return lookup(std::move(regions));
}

RegionPartition RegionPartition::load_lookup(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open lookup file: " + path.string());
  return read_lookup(in);
}

RegionPartition RegionPartition::from_spec(std::string_view spec) {
  if (spec.starts_with("grid:")) {
    const auto text = spec.substr(5);
    double cell = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cell);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      fail(ErrorCode::kInvalidArgument, "bad grid cell size in partition spec '" + std::string(spec) + "'");
    return grid(cell);
  }
  if (spec.starts_with("lookup:") && spec.size() > 7) return load_lookup(std::string(spec.substr(7)));
  fail(ErrorCode::kInvalidArgument, "partition spec must be grid:<deg> or lookup:<file>, got '" + std::string(spec) + "'");
}

std::optional<RegionId> RegionPartition::assign(const GeoPoint& p) const noexcept {
  if (!is_valid(p)) return std::nullopt;
  if (kind_ == Kind::kGrid) return cell_id({floor_div(p.lat_deg, cell_size_), floor_div(p.lon_deg, cell_size_)});

  if (!extent_.contains(p)) return std::nullopt;
  const double dlat = (extent_.max_lat - extent_.min_lat) / static_cast<double>(index_rows_);
  const double dlon = (extent_.max_lon - extent_.min_lon) / static_cast<double>(index_cols_);
  const auto r = std::clamp<std::int64_t>(static_cast<std::int64_t>((p.lat_deg - extent_.min_lat) / dlat), 0,
                                          index_rows_ - 1);
  const auto c = std::clamp<std::int64_t>(static_cast<std::int64_t>((p.lon_deg - extent_.min_lon) / dlon), 0,
                                          index_cols_ - 1);
  // Bucket lists are in ascending region order, so the first hit is the smallest id.
  for (std::uint32_t i : buckets_[static_cast<std::size_t>(r * index_cols_ + c)]) {
    const auto& region = regions_[i];
    if (!region.bbox.contains(p)) continue;
    if (region.ring.empty() || point_in_ring(p, region.ring)) return region.id;
  }
  return std::nullopt;
}

bool RegionPartition::contains(RegionId id) const noexcept {
  if (kind_ == Kind::kGrid) return id >= 0 && id < rows_ * cols_;
  return by_id_.contains(id);
}

std::optional<RegionMeta> RegionPartition::meta(RegionId id) const {
  if (!contains(id)) return std::nullopt;
  if (kind_ == Kind::kGrid) {
    const auto cell = cell_of(id);
    return RegionMeta{"cell(" + std::to_string(cell.row) + "," + std::to_string(cell.col) + ")", ""};
  }
  return regions_[by_id_.at(id)].meta;
}

std::optional<std::string> RegionPartition::country_of(RegionId id) const {
  if (kind_ == Kind::kGrid || !contains(id)) return std::nullopt;
  const auto& code = regions_[by_id_.at(id)].meta.country_code;
  if (code.empty()) return std::nullopt;
  return code;
}

GridCell RegionPartition::cell_of(RegionId id) const noexcept {
  return {id / cols_ - half_rows(cell_size_), id % cols_ - half_cols(cell_size_)};
}

RegionId RegionPartition::cell_id(GridCell cell) const noexcept {
  return (cell.row + half_rows(cell_size_)) * cols_ + (cell.col + half_cols(cell_size_));
}

GeoPoint RegionPartition::cell_center(RegionId id) const noexcept {
  const auto cell = cell_of(id);
  const double lat_lo = std::max(static_cast<double>(cell.row) * cell_size_, -90.0);
  const double lat_hi = std::min(static_cast<double>(cell.row + 1) * cell_size_, 90.0);
  const double lon_lo = std::max(static_cast<double>(cell.col) * cell_size_, -180.0);
  const double lon_hi = std::min(static_cast<double>(cell.col + 1) * cell_size_, 180.0);
  return {0.5 * (lat_lo + lat_hi), 0.5 * (lon_lo + lon_hi)};
}

}  // namespace mobitrail
