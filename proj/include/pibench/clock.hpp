#pragma once

#include <chrono>
#include <mutex>
#include <string>

namespace pibench {

using Duration = std::chrono::nanoseconds;

/// Time source for everything that waits or timestamps. Tests inject
/// ManualClock so runs are reproducible and never actually sleep.
class Clock {
 public:
  virtual ~Clock() = default;
  /// Monotonic time since an arbitrary epoch.
  virtual Duration now() = 0;
  virtual std::chrono::system_clock::time_point utc_now() = 0;
  virtual void sleep_for(Duration d) = 0;
};

class SystemClock final : public Clock {
 public:
  Duration now() override;
  std::chrono::system_clock::time_point utc_now() override;
  void sleep_for(Duration d) override;
};

/// Deterministic clock: sleeping advances time instantly.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::chrono::system_clock::time_point utc_origin = {})
      : utc_origin_(utc_origin) {}

  Duration now() override;
  std::chrono::system_clock::time_point utc_now() override;
  void sleep_for(Duration d) override;
  void advance(Duration d) { sleep_for(d); }
  /// Total time spent in sleep_for / advance.
  Duration slept() const;

 private:
  mutable std::mutex mutex_;
  Duration elapsed_{0};
  std::chrono::system_clock::time_point utc_origin_;
};

/// "2024-10-01T12:00:00Z"
std::string format_utc_iso8601(std::chrono::system_clock::time_point tp);

}  // namespace pibench
