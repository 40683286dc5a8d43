/* SPDX-License-Identifier: Apache-2.0 */
/*
 * mobitrail C API.
 *
 * Every object is an opaque handle created by an _open, _read or _compute style function and
 * released with the matching *_free. Functions that can fail return mt_status; on failure a
 * human-readable message is available from mt_last_error() on the same thread until the next
 * failing call. Paths accept "-" for stdin/stdout where noted.
 */
#ifndef MOBITRAIL_MOBITRAIL_H
#define MOBITRAIL_MOBITRAIL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MOBITRAIL_BUILDING_LIBRARY)
#    define MT_API __declspec(dllexport)
#  else
#    define MT_API __declspec(dllimport)
#  endif
#else
#  define MT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define MT_ABI_VERSION 1u

/* Values match the CLI exit codes. */
typedef enum mt_status {
  MT_OK = 0,
  MT_ERR_ARGUMENT = 2,
  MT_ERR_IO = 3,
  MT_ERR_EMPTY = 4,
  MT_ERR_FORMAT = 5,
  MT_ERR_INTERNAL = 6
} mt_status;

typedef struct mt_partition mt_partition;
typedef struct mt_events mt_events;
typedef struct mt_traces mt_traces;
typedef struct mt_gyration mt_gyration;
typedef struct mt_homes mt_homes;
typedef struct mt_agreement mt_agreement;
typedef struct mt_profile mt_profile;

typedef struct mt_ingest_report {
  uint64_t total_lines;
  uint64_t parsed;
  uint64_t parse_errors;
  uint64_t pruned_unresolvable;
  uint64_t users_in;
  uint64_t users_after_filter;
} mt_ingest_report;

typedef struct mt_night_window {
  int start_hour;
  int end_hour;
  int utc_offset_minutes;
} mt_night_window;

typedef struct mt_filter_policy {
  uint64_t min_events;
  int above_average;             /* nonzero: keep traces with more events than the mean */
  const char* consensus_country; /* NULL: no consensus filter */
} mt_filter_policy;

typedef struct mt_gyration_row {
  const char* user_id; /* valid while the owning handle lives */
  double com_lat;
  double com_lon;
  double r_g_km;
  uint64_t n_events;
} mt_gyration_row;

typedef struct mt_home_row {
  const char* user_id; /* valid while the owning handle lives */
  int method;          /* 1..5 */
  int has_region;
  int64_t region_id;
  double score;
  int tied;
} mt_home_row;

typedef enum mt_format { MT_FORMAT_CSV = 0, MT_FORMAT_JSONL = 1 } mt_format;

/* --- library ---------------------------------------------------------------------------- */
MT_API uint32_t mt_abi_version(void);
MT_API const char* mt_version_string(void);
MT_API const char* mt_last_error(void);
/* "debug" | "info" | "warn" | "error" | "off" */
MT_API mt_status mt_set_log_level(const char* level);
MT_API void mt_default_night_window(mt_night_window* out);

/* --- geometry and partitions ------------------------------------------------------------ */
MT_API double mt_haversine_km(double lat1, double lon1, double lat2, double lon2);
/* spec: "grid:<cell_deg>" or "lookup:<path-to-jsonl>" */
MT_API mt_status mt_partition_open(const char* spec, mt_partition** out);
MT_API void mt_partition_free(mt_partition* p);
/* *found is set to 0 when the point is outside coverage. */
MT_API mt_status mt_partition_assign(const mt_partition* p, double lat, double lon, int64_t* region_id, int* found);
/* Copies the ISO country code (possibly empty) including the terminator; returns the required size. */
MT_API size_t mt_partition_country(const mt_partition* p, int64_t region_id, char* buffer, size_t buffer_size);

/* --- ingest ----------------------------------------------------------------------------- */
/* Parses a CSV or JSONL event file ("-" = stdin). The report receives line counters. */
MT_API mt_status mt_events_read(const char* path, mt_format format, mt_events** out, mt_ingest_report* report);
MT_API void mt_events_free(mt_events* events);
MT_API uint64_t mt_events_count(const mt_events* events);
/* Sets region ids from the partition and drops unresolvable events. */
MT_API mt_status mt_events_prune(mt_events* events, const mt_partition* p, uint64_t* dropped);
/* Groups into traces. The events handle is emptied (ownership of the data moves). */
MT_API mt_status mt_traces_group(mt_events* events, unsigned threads, mt_traces** out);
MT_API void mt_traces_free(mt_traces* traces);
MT_API uint64_t mt_traces_user_count(const mt_traces* traces);
MT_API uint64_t mt_traces_event_count(const mt_traces* traces);
/* Filters in place. `homes` supplies consensus countries (with `p`) and may be NULL unless
 * policy->consensus_country is set. */
MT_API mt_status mt_traces_filter(mt_traces* traces, const mt_filter_policy* policy, const mt_homes* homes,
                                  const mt_partition* p);
/* Writes `user_id,timestamp,lat,lon,region_id` rows sorted by user and time. */
MT_API mt_status mt_traces_write_csv(const mt_traces* traces, const char* path);
MT_API mt_status mt_ingest_report_write_json(const mt_ingest_report* report, const char* path);

/* --- radius of gyration ----------------------------------------------------------------- */
MT_API mt_status mt_gyration_compute(const mt_traces* traces, unsigned threads, mt_gyration** out);
MT_API void mt_gyration_free(mt_gyration* g);
MT_API uint64_t mt_gyration_count(const mt_gyration* g);
MT_API mt_status mt_gyration_get(const mt_gyration* g, uint64_t index, mt_gyration_row* row);
/* `user_id,com_lat,com_lon,r_g_km,n_events` */
MT_API mt_status mt_gyration_write_csv(const mt_gyration* g, const char* path);
/* ECDF, boxplot, mean and median of r_g and of per-user activity. */
MT_API mt_status mt_gyration_write_distribution_json(const mt_gyration* g, const char* path);

/* --- home detection --------------------------------------------------------------------- */
MT_API mt_status mt_homes_detect(const mt_traces* traces, const mt_night_window* window, unsigned threads,
                                 mt_homes** out);
/* Reads `user_id,method,region_id,score,tied` rows ("-" = stdin). */
MT_API mt_status mt_homes_read_csv(const char* path, mt_homes** out);
MT_API void mt_homes_free(mt_homes* homes);
MT_API uint64_t mt_homes_user_count(const mt_homes* homes);
MT_API mt_status mt_homes_get(const mt_homes* homes, uint64_t user_index, int method, mt_home_row* row);
/* Keeps only users whose five winners agree on `country` under `p`. */
MT_API mt_status mt_homes_retain_country(mt_homes* homes, const mt_partition* p, const char* country);
/* Keeps only users present in `traces`. */
MT_API mt_status mt_homes_retain_users(mt_homes* homes, const mt_traces* traces);
MT_API mt_status mt_homes_write_csv(const mt_homes* homes, const char* path);

/* --- agreement -------------------------------------------------------------------------- */
MT_API mt_status mt_agreement_compute(const mt_homes* homes, mt_agreement** out);
MT_API void mt_agreement_free(mt_agreement* a);
MT_API uint64_t mt_agreement_user_count(const mt_agreement* a);
/* methods are 1..5 */
MT_API mt_status mt_agreement_smc(const mt_agreement* a, int method_x, int method_y, double* value);
MT_API mt_status mt_agreement_write_json(const mt_agreement* a, const char* path);
/* `pair,smc,disagreement` in radar order 1-2, 1-3, ..., 4-5 */
MT_API mt_status mt_agreement_write_radar_csv(const mt_agreement* a, const char* path);

/* --- synthetic cohorts ------------------------------------------------------------------ */
/* "transaction", "photo", or a key = value profile file. */
MT_API mt_status mt_profile_load(const char* name_or_path, mt_profile** out);
MT_API void mt_profile_free(mt_profile* profile);
MT_API mt_status mt_profile_set(mt_profile* profile, const char* key, const char* value);
/* Writes the event CSV and `user_id,home_lat,home_lon,home_region_id` truth CSV. */
MT_API mt_status mt_synth_generate(const mt_profile* profile, uint64_t n_users, const mt_partition* p,
                                   uint64_t seed, int strict, unsigned threads, const char* events_path,
                                   const char* truth_path);

/* --- end-to-end report ------------------------------------------------------------------ */
typedef struct mt_report_options {
  uint64_t n_users;
  uint64_t seed;
  mt_night_window night;
  mt_filter_policy home_filter; /* consensus_country is ignored */
  unsigned threads;
} mt_report_options;

MT_API void mt_default_report_options(mt_report_options* out);
/* Writes report.json and report.md under out_dir. *all_pass receives the directional verdict. */
MT_API mt_status mt_report_run(const mt_profile* transaction_like, const mt_profile* photo_like,
                               const char* partition_spec, const mt_report_options* options, const char* out_dir,
                               int* all_pass);

#ifdef __cplusplus
}
#endif

#endif /* MOBITRAIL_MOBITRAIL_H */
