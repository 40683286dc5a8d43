// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/mobitrail.h"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>

#include "mobitrail/agreement.hpp"
#include "mobitrail/error.hpp"
#include "mobitrail/gyration.hpp"
#include "mobitrail/homedetect.hpp"
#include "mobitrail/ingest.hpp"
#include "mobitrail/log.hpp"
#include "mobitrail/partition.hpp"
#include "mobitrail/report.hpp"
#include "mobitrail/synth.hpp"

using namespace mobitrail;

struct mt_partition {
  RegionPartition value;
};
struct mt_events {
  EventSet value;
};
struct mt_traces {
  TraceSet value;
};
struct mt_gyration {
  std::vector<GyrationResult> value;
};
struct mt_homes {
  std::vector<HomeAssignments> value;
};
struct mt_agreement {
  AgreementMatrix value;
};
struct mt_profile {
  ProfileConfig value;
};

namespace {

thread_local std::string g_last_error;

mt_status record(mt_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
mt_status guarded(F&& body) noexcept {
  try {
    body();
    return MT_OK;
  } catch (const Error& e) {
    return record(static_cast<mt_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(MT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(MT_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(MT_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

template <typename Writer>
void write_to(const char* path, Writer&& writer) {
  require(path, "output path");
  if (std::string_view(path) == "-") {
    writer(std::cout);
    std::cout.flush();
    if (!std::cout) fail(ErrorCode::kIo, "write to stdout failed");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, std::string("cannot open for writing: ") + path);
  writer(out);
  out.flush();
  if (!out) fail(ErrorCode::kIo, std::string("write failed: ") + path);
}

template <typename Reader>
auto read_from(const char* path, Reader&& reader) {
  require(path, "input path");
  if (std::string_view(path) == "-") return reader(std::cin);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    fail(ErrorCode::kIo, std::string("input file not found or not a regular file: ") + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, std::string("cannot open input: ") + path);
  std::vector<char> buffer(1 << 20);
  in.rdbuf()->pubsetbuf(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  return reader(in);
}

NightWindow to_window(const mt_night_window* w) {
  if (w == nullptr) return {};
  NightWindow out{w->start_hour, w->end_hour, w->utc_offset_minutes};
  out.validate();
  return out;
}

FilterPolicy to_policy(const mt_filter_policy* p) {
  require(p, "filter policy");
  FilterPolicy out;
  out.min_events = p->min_events;
  out.above_average = p->above_average != 0;
  if (p->consensus_country != nullptr) out.consensus_country = p->consensus_country;
  return out;
}

void dump_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

}  // namespace

extern "C" {

uint32_t mt_abi_version(void) { return MT_ABI_VERSION; }
const char* mt_version_string(void) { return "1.0.0"; }
const char* mt_last_error(void) { return g_last_error.c_str(); }

mt_status mt_set_log_level(const char* level) {
  return guarded([&] {
    require(level, "level");
    log::Level parsed;
    if (!log::parse_level(level, parsed)) fail(ErrorCode::kInvalidArgument, std::string("unknown log level: ") + level);
    log::set_level(parsed);
  });
}

void mt_default_night_window(mt_night_window* out) {
  if (out == nullptr) return;
  const NightWindow w;
  *out = {w.start_hour, w.end_hour, w.utc_offset_minutes};
}

double mt_haversine_km(double lat1, double lon1, double lat2, double lon2) {
  return haversine_km({lat1, lon1}, {lat2, lon2});
}

mt_status mt_partition_open(const char* spec, mt_partition** out) {
  return guarded([&] {
    require(spec, "partition spec");
    require(out, "out");
    *out = new mt_partition{RegionPartition::from_spec(spec)};
  });
}

void mt_partition_free(mt_partition* p) { delete p; }

mt_status mt_partition_assign(const mt_partition* p, double lat, double lon, int64_t* region_id, int* found) {
  return guarded([&] {
    require(p, "partition");
    require(region_id, "region_id");
    require(found, "found");
    const auto r = p->value.assign({lat, lon});
    *found = r.has_value() ? 1 : 0;
    *region_id = r.value_or(0);
  });
}

size_t mt_partition_country(const mt_partition* p, int64_t region_id, char* buffer, size_t buffer_size) {
  if (p == nullptr) return 0;
  const std::string code = p->value.country_of(region_id).value_or("");
  if (buffer != nullptr && buffer_size > 0) {
    const size_t n = std::min(code.size(), buffer_size - 1);
    std::copy_n(code.data(), n, buffer);
    buffer[n] = '\0';
  }
  return code.size() + 1;
}

mt_status mt_events_read(const char* path, mt_format format, mt_events** out, mt_ingest_report* report) {
  return guarded([&] {
    require(out, "out");
    const auto fmt = format == MT_FORMAT_JSONL ? InputFormat::kJsonl : InputFormat::kCsv;
    auto result = read_from(path, [&](std::istream& in) { return parse_events(in, fmt); });
    if (report != nullptr) {
      *report = {};
      report->total_lines = result.report.total_lines;
      report->parsed = result.report.parsed;
      report->parse_errors = result.report.parse_errors;
    }
    *out = new mt_events{std::move(result.events)};
  });
}

void mt_events_free(mt_events* events) { delete events; }
uint64_t mt_events_count(const mt_events* events) { return events ? events->value.size() : 0; }

mt_status mt_events_prune(mt_events* events, const mt_partition* p, uint64_t* dropped) {
  return guarded([&] {
    require(events, "events");
    require(p, "partition");
    const auto n = prune(events->value, p->value);
    if (dropped != nullptr) *dropped = n;
  });
}

mt_status mt_traces_group(mt_events* events, unsigned threads, mt_traces** out) {
  return guarded([&] {
    require(events, "events");
    require(out, "out");
    *out = new mt_traces{group_traces(std::move(events->value), threads)};
    events->value = EventSet{};
  });
}

void mt_traces_free(mt_traces* traces) { delete traces; }
uint64_t mt_traces_user_count(const mt_traces* t) { return t ? t->value.size() : 0; }
uint64_t mt_traces_event_count(const mt_traces* t) { return t ? t->value.event_count() : 0; }

mt_status mt_traces_filter(mt_traces* traces, const mt_filter_policy* policy, const mt_homes* homes,
                           const mt_partition* p) {
  return guarded([&] {
    require(traces, "traces");
    const FilterPolicy fp = to_policy(policy);
    ConsensusCountries countries;
    const ConsensusCountries* countries_ptr = nullptr;
    if (homes != nullptr) {
      require(p, "partition");
      countries = consensus_countries(homes->value, p->value);
      countries_ptr = &countries;
    }
    traces->value = apply_filter(std::move(traces->value), fp, countries_ptr);
  });
}

mt_status mt_traces_write_csv(const mt_traces* traces, const char* path) {
  return guarded([&] {
    require(traces, "traces");
    write_to(path, [&](std::ostream& out) { write_events_csv(out, traces->value); });
  });
}

mt_status mt_ingest_report_write_json(const mt_ingest_report* r, const char* path) {
  return guarded([&] {
    require(r, "report");
    IngestReport rep{r->total_lines, r->parsed, r->parse_errors, r->pruned_unresolvable, r->users_in,
                     r->users_after_filter};
    write_to(path, [&](std::ostream& out) { dump_json(out, to_json(rep)); });
  });
}

mt_status mt_gyration_compute(const mt_traces* traces, unsigned threads, mt_gyration** out) {
  return guarded([&] {
    require(traces, "traces");
    require(out, "out");
    *out = new mt_gyration{compute_gyration(traces->value, threads)};
  });
}

void mt_gyration_free(mt_gyration* g) { delete g; }
uint64_t mt_gyration_count(const mt_gyration* g) { return g ? g->value.size() : 0; }

mt_status mt_gyration_get(const mt_gyration* g, uint64_t index, mt_gyration_row* row) {
  return guarded([&] {
    require(g, "gyration");
    require(row, "row");
    if (index >= g->value.size()) fail(ErrorCode::kInvalidArgument, "gyration row index out of range");
    const auto& r = g->value[index];
    *row = {r.user_id.c_str(), r.center_of_mass.lat_deg, r.center_of_mass.lon_deg, r.r_g_km, r.n_events};
  });
}

mt_status mt_gyration_write_csv(const mt_gyration* g, const char* path) {
  return guarded([&] {
    require(g, "gyration");
    write_to(path, [&](std::ostream& out) { write_gyration_csv(out, g->value); });
  });
}

mt_status mt_gyration_write_distribution_json(const mt_gyration* g, const char* path) {
  return guarded([&] {
    require(g, "gyration");
    if (g->value.empty()) fail(ErrorCode::kEmpty, "no users to summarize");
    std::vector<double> rg, activity;
    rg.reserve(g->value.size());
    activity.reserve(g->value.size());
    for (const auto& r : g->value) {
      rg.push_back(r.r_g_km);
      activity.push_back(static_cast<double>(r.n_events));
    }
    const nlohmann::json j{{"users", g->value.size()}, {"r_g_km", to_json(summarize(rg))},
                           {"activity", to_json(summarize(activity))}};
    write_to(path, [&](std::ostream& out) { dump_json(out, j); });
  });
}

mt_status mt_homes_detect(const mt_traces* traces, const mt_night_window* window, unsigned threads,
                          mt_homes** out) {
  return guarded([&] {
    require(traces, "traces");
    require(out, "out");
    *out = new mt_homes{detect_all(traces->value, to_window(window), threads)};
  });
}

mt_status mt_homes_read_csv(const char* path, mt_homes** out) {
  return guarded([&] {
    require(out, "out");
    *out = new mt_homes{read_from(path, [](std::istream& in) { return read_homes_csv(in); })};
  });
}

void mt_homes_free(mt_homes* homes) { delete homes; }
uint64_t mt_homes_user_count(const mt_homes* homes) { return homes ? homes->value.size() : 0; }

mt_status mt_homes_get(const mt_homes* homes, uint64_t user_index, int method, mt_home_row* row) {
  return guarded([&] {
    require(homes, "homes");
    require(row, "row");
    if (user_index >= homes->value.size()) fail(ErrorCode::kInvalidArgument, "user index out of range");
    const auto& a = homes->value[user_index][method_index(method_from_number(method))];
    *row = {a.user_id.c_str(), method, a.region.has_value() ? 1 : 0, a.region.value_or(0), a.score, a.tied ? 1 : 0};
  });
}

mt_status mt_homes_retain_country(mt_homes* homes, const mt_partition* p, const char* country) {
  return guarded([&] {
    require(homes, "homes");
    require(p, "partition");
    require(country, "country");
    std::erase_if(homes->value, [&](const HomeAssignments& h) {
      const auto c = consensus_country(h, p->value);
      return !c || *c != country;
    });
  });
}

mt_status mt_homes_retain_users(mt_homes* homes, const mt_traces* traces) {
  return guarded([&] {
    require(homes, "homes");
    require(traces, "traces");
    std::erase_if(homes->value, [&](const HomeAssignments& h) { return !traces->value.find(h[0].user_id); });
  });
}

mt_status mt_homes_write_csv(const mt_homes* homes, const char* path) {
  return guarded([&] {
    require(homes, "homes");
    write_to(path, [&](std::ostream& out) { write_homes_csv(out, homes->value); });
  });
}

mt_status mt_agreement_compute(const mt_homes* homes, mt_agreement** out) {
  return guarded([&] {
    require(homes, "homes");
    require(out, "out");
    *out = new mt_agreement{pairwise_matrix(homes->value)};
  });
}

void mt_agreement_free(mt_agreement* a) { delete a; }
uint64_t mt_agreement_user_count(const mt_agreement* a) { return a ? a->value.n_users : 0; }

mt_status mt_agreement_smc(const mt_agreement* a, int method_x, int method_y, double* value) {
  return guarded([&] {
    require(a, "agreement");
    require(value, "value");
    *value = a->value.smc[method_index(method_from_number(method_x))][method_index(method_from_number(method_y))];
  });
}

mt_status mt_agreement_write_json(const mt_agreement* a, const char* path) {
  return guarded([&] {
    require(a, "agreement");
    write_to(path, [&](std::ostream& out) { dump_json(out, to_json(a->value)); });
  });
}

mt_status mt_agreement_write_radar_csv(const mt_agreement* a, const char* path) {
  return guarded([&] {
    require(a, "agreement");
    write_to(path, [&](std::ostream& out) { write_radar_csv(out, a->value); });
  });
}

mt_status mt_profile_load(const char* name_or_path, mt_profile** out) {
  return guarded([&] {
    require(name_or_path, "profile");
    require(out, "out");
    *out = new mt_profile{resolve_profile(name_or_path)};
  });
}

void mt_profile_free(mt_profile* profile) { delete profile; }

mt_status mt_profile_set(mt_profile* profile, const char* key, const char* value) {
  return guarded([&] {
    require(profile, "profile");
    require(key, "key");
    require(value, "value");
    ProfileConfig next = profile->value;
    set_profile_value(next, key, value);
    next.validate();
    profile->value = std::move(next);
  });
}

mt_status mt_synth_generate(const mt_profile* profile, uint64_t n_users, const mt_partition* p, uint64_t seed,
                            int strict, unsigned threads, const char* events_path, const char* truth_path) {
  return guarded([&] {
    require(profile, "profile");
    require(p, "partition");
    const auto out = generate(profile->value, n_users, p->value, seed, {strict != 0, threads});
    write_to(events_path, [&](std::ostream& os) { write_events_csv(os, out.events); });
    if (truth_path != nullptr) write_to(truth_path, [&](std::ostream& os) { write_truth_csv(os, out.truth); });
  });
}

void mt_default_report_options(mt_report_options* out) {
  if (out == nullptr) return;
  const CohortOptions d;
  *out = {};
  out->n_users = d.n_users;
  out->seed = d.seed;
  mt_default_night_window(&out->night);
  out->home_filter.min_events = d.home_filter.min_events;
  out->home_filter.above_average = d.home_filter.above_average ? 1 : 0;
  out->home_filter.consensus_country = nullptr;
  out->threads = d.threads;
}

mt_status mt_report_run(const mt_profile* transaction_like, const mt_profile* photo_like, const char* partition_spec,
                        const mt_report_options* options, const char* out_dir, int* all_pass) {
  return guarded([&] {
    require(transaction_like, "transaction-like profile");
    require(photo_like, "photo-like profile");
    require(partition_spec, "partition spec");
    require(options, "options");
    require(out_dir, "output directory");
    CohortOptions o;
    o.n_users = options->n_users;
    o.seed = options->seed;
    o.night = to_window(&options->night);
    o.home_filter = to_policy(&options->home_filter);
    o.home_filter.consensus_country.reset();
    o.threads = options->threads;
    const auto partition = RegionPartition::from_spec(partition_spec);
    const Report r = build_report(transaction_like->value, photo_like->value, partition, partition_spec, o);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::kIo, std::string("cannot create output directory: ") + out_dir);
    const auto dir = std::filesystem::path(out_dir);
    write_to((dir / "report.json").c_str(), [&](std::ostream& out) { dump_json(out, to_json(r)); });
    write_to((dir / "report.md").c_str(), [&](std::ostream& out) { out << to_markdown(r); });
    if (all_pass != nullptr) *all_pass = r.all_pass() ? 1 : 0;
  });
}

}  // extern "C"
