#include "kplane/error.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <set>

namespace kplane {

namespace {

std::atomic<bool> g_warnings_enabled{true};
std::mutex g_warn_mutex;
std::set<std::string> g_warned_keys;

}  // namespace

void set_warnings_enabled(bool enabled) { g_warnings_enabled = enabled; }

void warn(const std::string& message) {
  if (!g_warnings_enabled) return;
  std::lock_guard lock(g_warn_mutex);
  std::cerr << "kplane: warning: " << message << '\n';
}

void warn_once(const std::string& key, const std::string& message) {
  {
    std::lock_guard lock(g_warn_mutex);
    if (!g_warned_keys.insert(key).second) return;
  }
  warn(message);
}

}  // namespace kplane
