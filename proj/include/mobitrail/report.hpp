// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobitrail/agreement.hpp"
#include "mobitrail/gyration.hpp"
#include "mobitrail/homedetect.hpp"
#include "mobitrail/ingest.hpp"
#include "mobitrail/synth.hpp"

namespace mobitrail {

struct CohortOptions {
  std::uint64_t n_users = 1000;
  std::uint64_t seed = 42;
  NightWindow night;
  /// Applied before home detection only; r_g covers every user.
  FilterPolicy home_filter{0, true, std::nullopt};
  unsigned threads = 1;
};

struct CohortAnalysis {
  std::string profile_name;
  std::uint64_t users = 0;
  std::uint64_t events = 0;
  DistributionSummary activity;  // events per user
  DistributionSummary r_g;
  std::uint64_t home_users = 0;  // users entering home detection
  AgreementMatrix agreement;
  std::uint64_t tied_assignments = 0;
  /// Fraction of compared users whose method winner equals the planted home region.
  std::array<double, kMethodCount> truth_recovery{};
};

/// Synthesizes a cohort and runs prune, grouping, gyration, filtering, home detection and
/// agreement over it.
CohortAnalysis analyze_cohort(const ProfileConfig& profile, const RegionPartition& partition,
                              const CohortOptions& options);

struct Claim {
  std::string id;
  std::string statement;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::uint64_t seed = 0;
  std::string partition;
  CohortAnalysis transaction_like;
  CohortAnalysis photo_like;
  std::vector<Claim> claims;

  bool all_pass() const noexcept;
};

/// Both cohorts share the seed, so identical profiles produce identical cohorts.
Report build_report(const ProfileConfig& transaction_like, const ProfileConfig& photo_like,
                    const RegionPartition& partition, std::string partition_spec, const CohortOptions& options);

std::vector<Claim> directional_claims(const CohortAnalysis& transaction_like, const CohortAnalysis& photo_like);

nlohmann::json to_json(const CohortAnalysis& c);
nlohmann::json to_json(const Report& r);
std::string to_markdown(const Report& r);

}  // namespace mobitrail
