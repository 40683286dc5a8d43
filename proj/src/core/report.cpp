// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mobitrail {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

CohortAnalysis analyze_cohort(const ProfileConfig& profile, const RegionPartition& partition,
                              const CohortOptions& options) {
  CohortAnalysis c;
  c.profile_name = profile.name;
  auto synth = generate(profile, options.n_users, partition, options.seed, {false, options.threads});
  prune(synth.events, partition);
  TraceSet traces = group_traces(std::move(synth.events), options.threads);
  c.users = traces.size();
  c.events = traces.event_count();

  std::vector<double> activity(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) activity[i] = static_cast<double>(traces[i].size());
  c.activity = summarize(activity);

  const auto gyr = compute_gyration(traces, options.threads);
  std::vector<double> rg(gyr.size());
  for (std::size_t i = 0; i < gyr.size(); ++i) rg[i] = gyr[i].r_g_km;
  c.r_g = summarize(rg);

  FilterPolicy policy = options.home_filter;
  policy.consensus_country.reset();
  TraceSet home_traces = apply_filter(std::move(traces), policy);
  c.home_users = home_traces.size();
  const auto homes = detect_all(home_traces, options.night, options.threads);
  for (const auto& h : homes)
    for (const auto& a : h) c.tied_assignments += a.tied ? 1 : 0;
  const bool any_complete = std::any_of(homes.begin(), homes.end(), [](const HomeAssignments& h) {
    return std::all_of(h.begin(), h.end(), [](const auto& a) { return a.region.has_value(); });
  });
  if (!any_complete) return c;
  c.agreement = pairwise_matrix(homes);

  // Truth rows are in user order, like the trace set.
  std::array<std::uint64_t, kMethodCount> hits{};
  std::uint64_t compared = 0;
  std::size_t t = 0;
  for (const auto& h : homes) {
    if (!std::all_of(h.begin(), h.end(), [](const auto& a) { return a.region.has_value(); })) continue;
    while (synth.truth[t].user_id != h[0].user_id) ++t;
    ++compared;
    for (std::size_t m = 0; m < kMethodCount; ++m)
      if (*h[m].region == synth.truth[t].home_region_id) ++hits[m];
  }
  for (std::size_t m = 0; m < kMethodCount; ++m)
    c.truth_recovery[m] = compared ? static_cast<double>(hits[m]) / static_cast<double>(compared) : 0.0;
  return c;
}

std::vector<Claim> directional_claims(const CohortAnalysis& tx, const CohortAnalysis& ph) {
  std::vector<Claim> claims;
  claims.push_back({"rg_mean_direction", "photo-like mean r_g exceeds transaction-like mean r_g",
                    ph.r_g.mean > tx.r_g.mean,
                    "photo " + fixed(ph.r_g.mean) + " km vs transaction " + fixed(tx.r_g.mean) + " km"});
  const bool have_both = tx.agreement.n_users > 0 && ph.agreement.n_users > 0;
  const double tx_min = have_both ? min_off_diagonal(tx.agreement) : 0.0;
  const double ph_min = have_both ? min_off_diagonal(ph.agreement) : 0.0;
  claims.push_back({"smc_min_direction", "transaction-like minimum pairwise SMC exceeds photo-like minimum",
                    have_both && tx_min > ph_min,
                    "transaction " + fixed(tx_min) + " vs photo " + fixed(ph_min)});
  const double tx_dis = 1.0 - tx_min;
  const double ph_dis = 1.0 - ph_min;
  claims.push_back({"disagreement_spread", "photo-like max disagreement is at least twice the transaction-like one",
                    have_both && ph_dis > 0.0 && ph_dis >= 2.0 * tx_dis,
                    "photo " + fixed(ph_dis) + " vs transaction " + fixed(tx_dis)});
  return claims;
}

bool Report::all_pass() const noexcept {
  return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.pass; });
}

Report build_report(const ProfileConfig& transaction_like, const ProfileConfig& photo_like,
                    const RegionPartition& partition, std::string partition_spec, const CohortOptions& options) {
  Report r;
  r.seed = options.seed;
  r.partition = std::move(partition_spec);
  r.transaction_like = analyze_cohort(transaction_like, partition, options);
  r.photo_like = analyze_cohort(photo_like, partition, options);
  r.claims = directional_claims(r.transaction_like, r.photo_like);
  return r;
}

nlohmann::json to_json(const CohortAnalysis& c) {
  nlohmann::json recovery = nlohmann::json::object();
  for (std::size_t m = 0; m < kMethodCount; ++m) recovery[std::to_string(m + 1)] = c.truth_recovery[m];
  nlohmann::json j{{"profile", c.profile_name},
                   {"users", c.users},
                   {"events", c.events},
                   {"activity", to_json(c.activity)},
                   {"r_g", to_json(c.r_g)},
                   {"home_users", c.home_users},
                   {"tied_assignments", c.tied_assignments},
                   {"truth_recovery", recovery}};
  if (c.agreement.n_users > 0) {
    j["agreement"] = to_json(c.agreement);
    j["disagreement_range"] = {{"min", 1.0 - [&] {
                                  double hi = 0.0;
                                  for (const auto& e : radar_export(c.agreement)) hi = std::max(hi, e.smc);
                                  return hi;
                                }()},
                               {"max", max_disagreement(c.agreement)}};
  } else {
    j["agreement"] = nullptr;
    j["disagreement_range"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json claims = nlohmann::json::array();
  for (const auto& c : r.claims)
    claims.push_back({{"id", c.id}, {"statement", c.statement}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"seed", r.seed},
          {"partition", r.partition},
          {"cohorts", {{"transaction_like", to_json(r.transaction_like)}, {"photo_like", to_json(r.photo_like)}}},
          {"claims", claims},
          {"all_pass", r.all_pass()}};
}

std::string to_markdown(const Report& r) {
  std::ostringstream md;
  md << "# Home-location method comparison\n\n";
  md << "Seed " << r.seed << ", partition `" << r.partition << "`.\n\n";
  md << "## Mobility (radius of gyration, km)\n\n";
  md << "| cohort | users | events | mean r_g | median r_g | q1 | q3 |\n";
  md << "|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto* c : {&r.transaction_like, &r.photo_like}) {
    md << "| " << c->profile_name << " | " << c->users << " | " << c->events << " | " << fixed(c->r_g.mean) << " | "
       << fixed(c->r_g.median) << " | " << fixed(c->r_g.boxplot.q1) << " | " << fixed(c->r_g.boxplot.q3) << " |\n";
  }
  md << "\n## Pairwise SMC between home methods\n\n";
  md << "| pair | " << r.transaction_like.profile_name << " | " << r.photo_like.profile_name << " |\n";
  md << "|---|---:|---:|\n";
  const bool have = r.transaction_like.agreement.n_users > 0 && r.photo_like.agreement.n_users > 0;
  if (have) {
    const auto a = radar_export(r.transaction_like.agreement);
    const auto b = radar_export(r.photo_like.agreement);
    for (std::size_t i = 0; i < a.size(); ++i)
      md << "| " << a[i].pair << " | " << fixed(a[i].smc) << " | " << fixed(b[i].smc) << " |\n";
    md << "\nUsers compared: " << r.transaction_like.agreement.n_users << " / " << r.photo_like.agreement.n_users
       << ". Max disagreement (1 - SMC): " << fixed(max_disagreement(r.transaction_like.agreement)) << " / "
       << fixed(max_disagreement(r.photo_like.agreement)) << ".\n";
  }
  md << "\n## Directional claims\n\n";
  for (const auto& c : r.claims)
    md << "- " << (c.pass ? "PASS" : "FAIL") << " `" << c.id << "`: " << c.statement << " (" << c.detail << ")\n";
  md << "\nOverall: " << (r.all_pass() ? "PASS" : "FAIL") << "\n";
  return md.str();
}

}  // namespace mobitrail
