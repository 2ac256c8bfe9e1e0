#pragma once

#include <functional>
#include <string_view>

namespace gsd {

// Non-fatal warnings (alpha outside the convergent range, zero feature rows,
// dropped citations). The default sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;

void warn(std::string_view message);

// Installs `sink` and returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

// Restores the previous sink on destruction; handy in tests.
class ScopedWarningSink {
 public:
  explicit ScopedWarningSink(WarningSink sink) : previous_(set_warning_sink(std::move(sink))) {}
  ~ScopedWarningSink() { set_warning_sink(std::move(previous_)); }
  ScopedWarningSink(const ScopedWarningSink&) = delete;
  ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

 private:
  WarningSink previous_;
};

}  // namespace gsd
