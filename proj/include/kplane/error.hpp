#pragma once

#include <stdexcept>
#include <string>

namespace kplane {

/// Raised on any violated precondition or invalid input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

/// Emits a warning on stderr at most once per key for the lifetime of the process.
void warn_once(const std::string& key, const std::string& message);

/// Emits a warning on stderr unconditionally (unless silenced).
void warn(const std::string& message);

/// Suppresses all warnings (used by tests that exercise warning paths).
void set_warnings_enabled(bool enabled);

}  // namespace kplane
