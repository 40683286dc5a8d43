// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mobitrail/geo.hpp"

namespace mobitrail {

using RegionId = std::int64_t;
using UserIndex = std::uint32_t;

/// One geotagged user action. `user` indexes the user table of the owning EventSet or TraceSet.
struct Event {
  UserIndex user = 0;
  std::int64_t timestamp = 0;  // Unix seconds, UTC
  GeoPoint point;
  std::optional<RegionId> region;
};

/// Canonical in-trace order: timestamp, then region (absent first), then lat, then lon.
bool canonical_less(const Event& a, const Event& b) noexcept;

/// Flat, unsorted event storage with interned user identifiers.
struct EventSet {
  std::vector<std::string> users;
  std::vector<Event> events;

  UserIndex intern(std::string_view user_id);
  std::size_t size() const noexcept { return events.size(); }

 private:
  std::unordered_map<std::string, UserIndex> index_;
  std::string last_user_;
  UserIndex last_index_ = 0;
};

/// Read-only view of a single user's canonically ordered events.
struct TraceView {
  std::string_view user_id;
  std::span<const Event> events;

  std::size_t size() const noexcept { return events.size(); }
};

/// Owning single-user trace; the constructor sorts events canonically.
class UserTrace {
 public:
  UserTrace(std::string user_id, std::vector<Event> events);

  const std::string& user_id() const noexcept { return user_id_; }
  std::span<const Event> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  TraceView view() const noexcept { return {user_id_, events_}; }

 private:
  std::string user_id_;
  std::vector<Event> events_;
};

/// All traces of a dataset in one contiguous buffer, users ordered by user_id.
class TraceSet {
 public:
  TraceSet() = default;

  /// `events` must already be grouped by user (ascending UserIndex == position in `users`)
  /// and canonically sorted within each user; `users` must be strictly ascending.
  static TraceSet from_sorted(std::vector<std::string> users, std::vector<Event> events);

  std::size_t size() const noexcept { return users_.size(); }
  bool empty() const noexcept { return users_.empty(); }
  std::size_t event_count() const noexcept { return events_.size(); }

  TraceView operator[](std::size_t i) const noexcept {
    return {users_[i], std::span<const Event>(events_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i])};
  }

  const std::vector<std::string>& users() const noexcept { return users_; }
  const std::vector<Event>& events() const noexcept { return events_; }

  /// Index of `user_id`, if present.
  std::optional<std::size_t> find(std::string_view user_id) const;

  /// Keeps traces whose `keep` flag is set, reindexing users. `keep.size()` must equal size().
  TraceSet select(const std::vector<bool>& keep) &&;
  TraceSet select(const std::vector<bool>& keep) const&;

 private:
  std::vector<std::string> users_;
  std::vector<Event> events_;
  std::vector<std::size_t> offsets_{0};
};

}  // namespace mobitrail
