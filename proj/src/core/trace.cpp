// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/trace.hpp"

#include <algorithm>
#include <tuple>

#include "mobitrail/error.hpp"

namespace mobitrail {

bool canonical_less(const Event& a, const Event& b) noexcept {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.region != b.region) return a.region < b.region;  // nullopt orders first
  if (a.point.lat_deg != b.point.lat_deg) return a.point.lat_deg < b.point.lat_deg;
  return a.point.lon_deg < b.point.lon_deg;
}

UserIndex EventSet::intern(std::string_view user_id) {
  // Inputs are frequently clustered by user; skip the hash lookup on repeats.
  if (!users.empty() && user_id == last_user_) return last_index_;
  auto [it, inserted] = index_.try_emplace(std::string(user_id), static_cast<UserIndex>(users.size()));
  if (inserted) users.emplace_back(user_id);
  last_user_.assign(user_id);
  last_index_ = it->second;
  return it->second;
}

UserTrace::UserTrace(std::string user_id, std::vector<Event> events)
    : user_id_(std::move(user_id)), events_(std::move(events)) {
  if (events_.empty()) fail(ErrorCode::kInvalidArgument, "trace for user '" + user_id_ + "' has no events");
  std::sort(events_.begin(), events_.end(), canonical_less);
}

TraceSet TraceSet::from_sorted(std::vector<std::string> users, std::vector<Event> events) {
  TraceSet out;
  out.offsets_.assign(users.size() + 1, 0);
  for (const auto& e : events) {
    if (e.user >= users.size()) fail(ErrorCode::kInternal, "event references unknown user index");
    ++out.offsets_[e.user + 1];
  }
  for (std::size_t i = 1; i < out.offsets_.size(); ++i) out.offsets_[i] += out.offsets_[i - 1];
  out.users_ = std::move(users);
  out.events_ = std::move(events);
  return out;
}

std::optional<std::size_t> TraceSet::find(std::string_view user_id) const {
  auto it = std::lower_bound(users_.begin(), users_.end(), user_id,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == users_.end() || *it != user_id) return std::nullopt;
  return static_cast<std::size_t>(it - users_.begin());
}

TraceSet TraceSet::select(const std::vector<bool>& keep) && {
  if (keep.size() != users_.size()) fail(ErrorCode::kInternal, "selection mask size mismatch");
  std::vector<std::string> users;
  std::size_t write = 0;
  UserIndex next = 0;
  for (std::size_t u = 0; u < users_.size(); ++u) {
    if (!keep[u]) continue;
    for (std::size_t i = offsets_[u]; i < offsets_[u + 1]; ++i) {
      Event e = events_[i];
      e.user = next;
      events_[write++] = e;
    }
    users.push_back(std::move(users_[u]));
    ++next;
  }
  events_.resize(write);
  events_.shrink_to_fit();
  return from_sorted(std::move(users), std::move(events_));
}

TraceSet TraceSet::select(const std::vector<bool>& keep) const& {
  TraceSet copy = *this;
  return std::move(copy).select(keep);
}

}  // namespace mobitrail
