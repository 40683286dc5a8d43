// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mobitrail/trace.hpp"
#include "oracles.hpp"

namespace fixture {

struct Row {
  std::int64_t ts;
  double lat;
  double lon;
  std::optional<mobitrail::RegionId> region;
};

inline mobitrail::UserTrace trace(const std::string& user, const std::vector<Row>& rows) {
  std::vector<mobitrail::Event> evs;
  for (const auto& r : rows) evs.push_back({0, r.ts, {r.lat, r.lon}, r.region});
  return mobitrail::UserTrace(user, std::move(evs));
}

inline mobitrail::UserTrace region_trace(const std::string& user, const std::vector<oracle::Ev>& evs) {
  std::vector<mobitrail::Event> out;
  for (const auto& e : evs) out.push_back({0, e.ts, {0.0, 0.0}, e.region});
  return mobitrail::UserTrace(user, std::move(out));
}

inline std::filesystem::path source_dir() { return MOBITRAIL_TEST_DATA_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::path(MOBITRAIL_TEST_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
