// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobitrail/homedetect.hpp"

namespace mobitrail {

/// One method's outcome over a population: user_id -> region_id.
struct AssignmentVector {
  Method method = Method::kMaxEvents;
  std::map<std::string, RegionId, std::less<>> entries;
};

/// Simple Matching Coefficient: fraction of users assigned the same region by both vectors.
/// Throws Error(kInvalidArgument) when the user sets differ or are empty.
double smc(const AssignmentVector& x, const AssignmentVector& y);

struct AgreementMatrix {
  std::array<std::array<double, kMethodCount>, kMethodCount> smc{};
  std::size_t n_users = 0;
};

/// Pairwise SMC over users with a region under all five methods (optionally restricted to
/// `users`). Throws Error(kEmpty) when no user qualifies.
AgreementMatrix pairwise_matrix(std::span<const HomeAssignments> homes, const std::set<std::string>* users = nullptr);

/// Builds the vector for one method over the users that have a region under every method.
AssignmentVector assignment_vector(std::span<const HomeAssignments> homes, Method method);

struct RadarEntry {
  std::string pair;  // "1-2", "1-3", ...
  double smc = 0.0;
  double disagreement = 0.0;  // 1 - smc
};

/// The ten method pairs in order 1-2, 1-3, 1-4, 1-5, 2-3, 2-4, 2-5, 3-4, 3-5, 4-5.
std::vector<RadarEntry> radar_export(const AgreementMatrix& m);

double min_off_diagonal(const AgreementMatrix& m);
double max_disagreement(const AgreementMatrix& m);

/// {n_users, pairs: [{pair, smc, disagreement}], matrix: [[...]]}
nlohmann::json to_json(const AgreementMatrix& m);
/// `pair,smc,disagreement`
void write_radar_csv(std::ostream& out, const AgreementMatrix& m);

}  // namespace mobitrail
