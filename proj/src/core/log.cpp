// SPDX-License-Identifier: Apache-2.0
#include "mobitrail/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace mobitrail::log {

namespace {
std::atomic<Level> g_level{Level::kWarn};
std::mutex g_mutex;
constexpr const char* kNames[] = {"debug", "info", "warn", "error", "off"};
}  // namespace

void set_level(Level level) noexcept { g_level.store(level); }
Level level() noexcept { return g_level.load(); }

bool parse_level(std::string_view text, Level& out) noexcept {
  for (int i = 0; i <= static_cast<int>(Level::kOff); ++i) {
    if (text == kNames[i]) {
      out = static_cast<Level>(i);
      return true;
    }
  }
  return false;
}

void write(Level lvl, std::string_view message) {
  if (lvl < g_level.load() || lvl == Level::kOff) return;
  std::lock_guard lock(g_mutex);
  std::fprintf(stderr, "[mobitrail %s] %.*s\n", kNames[static_cast<int>(lvl)], static_cast<int>(message.size()),
               message.data());
}

}  // namespace mobitrail::log
