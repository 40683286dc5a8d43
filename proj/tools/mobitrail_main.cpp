// SPDX-License-Identifier: Apache-2.0
//
// mobitrail command-line front end. Uses only the C API in mobitrail/mobitrail.h.
//
// Exit codes: 0 ok, 2 bad arguments, 3 I/O failure, 4 empty result set, 5 malformed input,
// 6 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobitrail/mobitrail.h"

namespace {

namespace fs = std::filesystem;

struct CommandFailure : std::runtime_error {
  CommandFailure(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

void check(mt_status s, const std::string& context) {
  if (s != MT_OK) throw CommandFailure(static_cast<int>(s), context + ": " + mt_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const noexcept { Free(p); }
};
using PartitionPtr = std::unique_ptr<mt_partition, Deleter<mt_partition, mt_partition_free>>;
using EventsPtr = std::unique_ptr<mt_events, Deleter<mt_events, mt_events_free>>;
using TracesPtr = std::unique_ptr<mt_traces, Deleter<mt_traces, mt_traces_free>>;
using GyrationPtr = std::unique_ptr<mt_gyration, Deleter<mt_gyration, mt_gyration_free>>;
using HomesPtr = std::unique_ptr<mt_homes, Deleter<mt_homes, mt_homes_free>>;
using AgreementPtr = std::unique_ptr<mt_agreement, Deleter<mt_agreement, mt_agreement_free>>;
using ProfilePtr = std::unique_ptr<mt_profile, Deleter<mt_profile, mt_profile_free>>;

struct Common {
  std::string input;
  std::string out = ".";
  std::string partition = "grid:0.5";
  std::string format = "auto";
  std::string night = "19-7";
  int utc_offset = 0;
  std::uint64_t min_events = 0;
  bool above_average = false;
  std::string consensus_country;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string log_level = "warn";
};

bool to_stdout(const Common& c) { return c.out == "-"; }

// Primary data file: stdout under `-o -`, else <out>/<name>.
std::string data_path(const Common& c, const std::string& name) {
  return to_stdout(c) ? std::string("-") : (fs::path(c.out) / name).string();
}

// Secondary artifacts are suppressed when stdout carries the data.
std::optional<std::string> side_path(const Common& c, const std::string& name) {
  if (to_stdout(c)) return std::nullopt;
  return (fs::path(c.out) / name).string();
}

void prepare_out(const Common& c) {
  if (to_stdout(c)) return;
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) throw CommandFailure(MT_ERR_IO, "cannot create output directory " + c.out);
}

mt_night_window parse_night(const Common& c) {
  mt_night_window w;
  mt_default_night_window(&w);
  const auto dash = c.night.find('-');
  try {
    if (dash == std::string::npos) throw std::invalid_argument("missing '-'");
    std::size_t used = 0;
    w.start_hour = std::stoi(c.night.substr(0, dash), &used);
    if (used != dash) throw std::invalid_argument("start");
    const auto end_text = c.night.substr(dash + 1);
    w.end_hour = std::stoi(end_text, &used);
    if (used != end_text.size()) throw std::invalid_argument("end");
  } catch (const std::exception&) {
    throw CommandFailure(MT_ERR_ARGUMENT, "--night expects START-END hours, e.g. 19-7");
  }
  w.utc_offset_minutes = c.utc_offset;
  if (w.start_hour < 0 || w.start_hour > 23 || w.end_hour < 0 || w.end_hour > 23 || w.start_hour == w.end_hour)
    throw CommandFailure(MT_ERR_ARGUMENT, "--night hours must be distinct values in 0..23");
  return w;
}

mt_format input_format(const Common& c) {
  if (c.format == "csv") return MT_FORMAT_CSV;
  if (c.format == "jsonl") return MT_FORMAT_JSONL;
  if (c.format != "auto") throw CommandFailure(MT_ERR_ARGUMENT, "--format must be csv, jsonl or auto");
  const auto ext = fs::path(c.input).extension().string();
  return (ext == ".jsonl" || ext == ".ndjson") ? MT_FORMAT_JSONL : MT_FORMAT_CSV;
}

PartitionPtr open_partition(const std::string& spec) {
  mt_partition* p = nullptr;
  check(mt_partition_open(spec.c_str(), &p), "partition");
  return PartitionPtr(p);
}

mt_filter_policy policy_of(const Common& c) {
  mt_filter_policy p{};
  p.min_events = c.min_events;
  p.above_average = c.above_average ? 1 : 0;
  p.consensus_country = c.consensus_country.empty() ? nullptr : c.consensus_country.c_str();
  return p;
}

struct Loaded {
  TracesPtr traces;
  mt_ingest_report report{};
};

// Parse, optionally prune, and group.
Loaded load_traces(const Common& c, const mt_partition* partition) {
  Loaded l;
  mt_events* raw = nullptr;
  check(mt_events_read(c.input.c_str(), input_format(c), &raw, &l.report), "reading " + c.input);
  EventsPtr events(raw);
  if (partition != nullptr) check(mt_events_prune(events.get(), partition, &l.report.pruned_unresolvable), "prune");
  mt_traces* t = nullptr;
  check(mt_traces_group(events.get(), c.threads, &t), "grouping");
  l.traces.reset(t);
  l.report.users_in = mt_traces_user_count(t);
  return l;
}

void require_nonempty(const mt_traces* t, const std::string& what) {
  if (mt_traces_user_count(t) == 0) throw CommandFailure(MT_ERR_EMPTY, what);
}

int cmd_ingest(const Common& c) {
  prepare_out(c);
  auto partition = open_partition(c.partition);
  Loaded l = load_traces(c, partition.get());
  if (!c.consensus_country.empty())
    throw CommandFailure(MT_ERR_ARGUMENT, "--consensus-country applies to the home command");
  const auto policy = policy_of(c);
  check(mt_traces_filter(l.traces.get(), &policy, nullptr, nullptr), "filter");
  l.report.users_after_filter = mt_traces_user_count(l.traces.get());
  if (auto p = side_path(c, "ingest_report.json")) check(mt_ingest_report_write_json(&l.report, p->c_str()), "report");
  if (l.report.parsed == 0) throw CommandFailure(MT_ERR_EMPTY, "no parseable events in " + c.input);
  require_nonempty(l.traces.get(), "no events left after pruning and filtering");
  check(mt_traces_write_csv(l.traces.get(), data_path(c, "events.csv").c_str()), "writing events");
  return 0;
}

int cmd_gyration(const Common& c, bool prune_with_partition) {
  prepare_out(c);
  PartitionPtr partition;
  if (prune_with_partition) partition = open_partition(c.partition);
  Loaded l = load_traces(c, partition.get());
  const auto policy = policy_of(c);
  if (policy.consensus_country != nullptr)
    throw CommandFailure(MT_ERR_ARGUMENT, "--consensus-country applies to the home command");
  check(mt_traces_filter(l.traces.get(), &policy, nullptr, nullptr), "filter");
  require_nonempty(l.traces.get(), "no users to analyse");
  mt_gyration* g = nullptr;
  check(mt_gyration_compute(l.traces.get(), c.threads, &g), "gyration");
  GyrationPtr gyr(g);
  check(mt_gyration_write_csv(g, data_path(c, "gyration.csv").c_str()), "writing gyration");
  if (auto p = side_path(c, "distribution.json")) check(mt_gyration_write_distribution_json(g, p->c_str()), "distribution");
  return 0;
}

int cmd_home(const Common& c) {
  prepare_out(c);
  const auto window = parse_night(c);
  auto partition = open_partition(c.partition);
  Loaded l = load_traces(c, partition.get());
  const auto policy = policy_of(c);
  HomesPtr homes;
  mt_homes* h = nullptr;
  if (policy.consensus_country != nullptr) {
    // Consensus needs every user's five winners before filtering.
    check(mt_homes_detect(l.traces.get(), &window, c.threads, &h), "home detection");
    homes.reset(h);
    check(mt_traces_filter(l.traces.get(), &policy, homes.get(), partition.get()), "filter");
    check(mt_homes_retain_users(homes.get(), l.traces.get()), "filter");
  } else {
    check(mt_traces_filter(l.traces.get(), &policy, nullptr, nullptr), "filter");
    check(mt_homes_detect(l.traces.get(), &window, c.threads, &h), "home detection");
    homes.reset(h);
  }
  if (mt_homes_user_count(homes.get()) == 0) throw CommandFailure(MT_ERR_EMPTY, "no users left after filtering");
  check(mt_homes_write_csv(homes.get(), data_path(c, "homes.csv").c_str()), "writing homes");
  return 0;
}

int cmd_agree(const Common& c) {
  prepare_out(c);
  mt_homes* h = nullptr;
  check(mt_homes_read_csv(c.input.c_str(), &h), "reading " + c.input);
  HomesPtr homes(h);
  mt_agreement* a = nullptr;
  check(mt_agreement_compute(homes.get(), &a), "agreement");
  AgreementPtr agreement(a);
  check(mt_agreement_write_json(a, data_path(c, "agreement.json").c_str()), "writing agreement");
  if (auto p = side_path(c, "radar.csv")) check(mt_agreement_write_radar_csv(a, p->c_str()), "writing radar");
  return 0;
}

ProfilePtr load_profile(const std::string& name, const std::vector<std::string>& overrides) {
  mt_profile* p = nullptr;
  check(mt_profile_load(name.c_str(), &p), "profile " + name);
  ProfilePtr profile(p);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CommandFailure(MT_ERR_ARGUMENT, "--set expects key=value, got " + kv);
    check(mt_profile_set(p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
  }
  return profile;
}

int cmd_synth(const Common& c, const std::string& profile_name, const std::vector<std::string>& overrides,
              std::uint64_t users, bool strict) {
  prepare_out(c);
  auto profile = load_profile(profile_name, overrides);
  auto partition = open_partition(c.partition);
  const auto events = data_path(c, "events.csv");
  const auto truth = side_path(c, "truth.csv");
  check(mt_synth_generate(profile.get(), users, partition.get(), c.seed, strict ? 1 : 0, c.threads, events.c_str(),
                          truth ? truth->c_str() : nullptr),
        "synth");
  return 0;
}

int cmd_report(const Common& c, const std::string& profile_a, const std::string& profile_b, std::uint64_t users,
               bool no_above_average) {
  if (to_stdout(c)) throw CommandFailure(MT_ERR_ARGUMENT, "report writes files; --out must be a directory");
  prepare_out(c);
  auto a = load_profile(profile_a, {});
  auto b = load_profile(profile_b, {});
  mt_report_options o;
  mt_default_report_options(&o);
  o.n_users = users;
  o.seed = c.seed;
  o.night = parse_night(c);
  o.home_filter.min_events = c.min_events;
  o.home_filter.above_average = no_above_average ? 0 : 1;
  o.threads = c.threads;
  int pass = 0;
  check(mt_report_run(a.get(), b.get(), c.partition.c_str(), &o, c.out.c_str(), &pass), "report");
  std::fprintf(stderr, "directional claims: %s\n", pass ? "PASS" : "FAIL");
  return 0;
}

void add_io(CLI::App* cmd, Common& c, bool input_required = true) {
  auto* in = cmd->add_option("-i,--input", c.input, "Input file (- for stdin)");
  if (input_required) in->required();
  cmd->add_option("-o,--out", c.out, "Output directory, or - to write the primary data to stdout");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
}

void add_filters(CLI::App* cmd, Common& c) {
  cmd->add_option("--min-events", c.min_events, "Drop users with fewer events");
  cmd->add_flag("--above-average", c.above_average, "Keep users with more events than the mean");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mobitrail: home-location inference, radius of gyration and method agreement"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML config file (flags take precedence)");
  Common c;
  app.add_option("--log-level", c.log_level, "debug|info|warn|error|off");

  auto* ingest = app.add_subcommand("ingest", "Parse, prune and filter an event log");
  add_io(ingest, c);
  ingest->add_option("--format", c.format, "csv|jsonl|auto");
  ingest->add_option("--partition", c.partition, "grid:<deg> or lookup:<file>");
  add_filters(ingest, c);

  auto* gyration = app.add_subcommand("gyration", "Per-user radius of gyration and its distribution");
  add_io(gyration, c);
  gyration->add_option("--format", c.format, "csv|jsonl|auto");
  auto* gyr_partition = gyration->add_option("--partition", c.partition, "Prune with this partition first");
  add_filters(gyration, c);

  auto* home = app.add_subcommand("home", "Five home-location methods per user");
  add_io(home, c);
  home->add_option("--format", c.format, "csv|jsonl|auto");
  home->add_option("--partition", c.partition, "grid:<deg> or lookup:<file>");
  home->add_option("--night", c.night, "Night window START-END in local hours");
  home->add_option("--utc-offset", c.utc_offset, "Local time offset from UTC in minutes");
  add_filters(home, c);
  home->add_option("--consensus-country", c.consensus_country, "Keep users whose five homes share this country");

  auto* agree = app.add_subcommand("agree", "Pairwise SMC between the five methods");
  add_io(agree, c);

  std::string profile = "transaction";
  std::vector<std::string> overrides;
  std::uint64_t users = 1000;
  bool strict = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort with planted homes");
  add_io(synth, c, false);
  synth->add_option("--profile", profile, "transaction|photo|<profile file>");
  synth->add_option("--set", overrides, "Override a profile key (key=value), repeatable");
  synth->add_option("--users", users, "Number of users")->check(CLI::PositiveNumber);
  synth->add_option("--seed", c.seed, "Master seed");
  synth->add_option("--partition", c.partition, "grid:<deg> or lookup:<file>");
  synth->add_flag("--strict", strict, "Fail instead of redrawing points outside the partition");

  std::string profile_a = "transaction";
  std::string profile_b = "photo";
  bool no_above_average = false;
  auto* report = app.add_subcommand("report", "Compare a transaction-like and a photo-like cohort end to end");
  add_io(report, c, false);
  report->add_option("--profile-a", profile_a, "Transaction-like cohort profile");
  report->add_option("--profile-b", profile_b, "Photo-like cohort profile");
  report->add_option("--users", users, "Users per cohort")->check(CLI::PositiveNumber);
  report->add_option("--seed", c.seed, "Master seed shared by both cohorts");
  report->add_option("--partition", c.partition, "grid:<deg> or lookup:<file>");
  report->add_option("--night", c.night, "Night window START-END in local hours");
  report->add_option("--utc-offset", c.utc_offset, "Local time offset from UTC in minutes");
  report->add_option("--min-events", c.min_events, "Minimum events for home detection");
  report->add_flag("--no-above-average", no_above_average, "Run home detection on all users");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : MT_ERR_ARGUMENT;
  }

  try {
    check(mt_set_log_level(c.log_level.c_str()), "--log-level");
    if (*ingest) return cmd_ingest(c);
    if (*gyration) return cmd_gyration(c, gyr_partition->count() > 0);
    if (*home) return cmd_home(c);
    if (*agree) return cmd_agree(c);
    if (*synth) return cmd_synth(c, profile, overrides, users, strict);
    if (*report) return cmd_report(c, profile_a, profile_b, users, no_above_average);
  } catch (const CommandFailure& e) {
    std::fprintf(stderr, "mobitrail: %s\n", e.what());
    return e.exit_code;
  }
  return MT_ERR_ARGUMENT;
}
