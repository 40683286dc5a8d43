// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/agreement.hpp"

#include <algorithm>

#include "mobitrail/error.hpp"

namespace mobitrail {

namespace {

bool complete(const HomeAssignments& h) {
  return std::all_of(h.begin(), h.end(), [](const HomeAssignment& a) { return a.region.has_value(); });
}

}  // namespace

double smc(const AssignmentVector& x, const AssignmentVector& y) {
  if (x.entries.empty() || y.entries.empty()) fail(ErrorCode::kInvalidArgument, "SMC over an empty population");
  if (x.entries.size() != y.entries.size()) fail(ErrorCode::kInvalidArgument, "SMC vectors cover different users");
  std::size_t matches = 0;
  auto ix = x.entries.begin();
  auto iy = y.entries.begin();
  for (; ix != x.entries.end(); ++ix, ++iy) {
    if (ix->first != iy->first) fail(ErrorCode::kInvalidArgument, "SMC vectors cover different users");
    if (ix->second == iy->second) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(x.entries.size());
}

AssignmentVector assignment_vector(std::span<const HomeAssignments> homes, Method method) {
  AssignmentVector v{method, {}};
  for (const auto& h : homes)
    if (complete(h)) v.entries.emplace(h[0].user_id, *h[method_index(method)].region);
  return v;
}

AgreementMatrix pairwise_matrix(std::span<const HomeAssignments> homes, const std::set<std::string>* users) {
  std::array<std::array<std::size_t, kMethodCount>, kMethodCount> matches{};
  std::size_t n = 0;
  for (const auto& h : homes) {
    if (!complete(h)) continue;
    if (users != nullptr && !users->contains(h[0].user_id)) continue;
    ++n;
    for (std::size_t i = 0; i < kMethodCount; ++i)
      for (std::size_t j = i + 1; j < kMethodCount; ++j)
        if (*h[i].region == *h[j].region) ++matches[i][j];
  }
  if (n == 0) fail(ErrorCode::kEmpty, "no users with a home under all five methods");
  AgreementMatrix m;
  m.n_users = n;
  for (std::size_t i = 0; i < kMethodCount; ++i) {
    m.smc[i][i] = 1.0;
    for (std::size_t j = i + 1; j < kMethodCount; ++j) {
      m.smc[i][j] = static_cast<double>(matches[i][j]) / static_cast<double>(n);
      m.smc[j][i] = m.smc[i][j];
    }
  }
  return m;
}

std::vector<RadarEntry> radar_export(const AgreementMatrix& m) {
  std::vector<RadarEntry> out;
  out.reserve(10);
  for (std::size_t i = 0; i < kMethodCount; ++i)
    for (std::size_t j = i + 1; j < kMethodCount; ++j)
      out.push_back({std::to_string(i + 1) + "-" + std::to_string(j + 1), m.smc[i][j], 1.0 - m.smc[i][j]});
  return out;
}

double min_off_diagonal(const AgreementMatrix& m) {
  double lo = 1.0;
  for (const auto& e : radar_export(m)) lo = std::min(lo, e.smc);
  return lo;
}

double max_disagreement(const AgreementMatrix& m) { return 1.0 - min_off_diagonal(m); }

nlohmann::json to_json(const AgreementMatrix& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& e : radar_export(m))
    pairs.push_back({{"pair", e.pair}, {"smc", e.smc}, {"disagreement", e.disagreement}});
  nlohmann::json matrix = nlohmann::json::array();
  for (const auto& row : m.smc) matrix.push_back(row);
  return {{"n_users", m.n_users}, {"pairs", pairs}, {"matrix", matrix}};
}

void write_radar_csv(std::ostream& out, const AgreementMatrix& m) {
  out << "pair,smc,disagreement\n";
  for (const auto& e : radar_export(m)) {
    std::string row = e.pair + ",";
    append_double(row, e.smc);
    row.push_back(',');
    append_double(row, e.disagreement);
    out << row << '\n';
  }
}

}  // namespace mobitrail
