#include "pibench/clock.hpp"

#include <ctime>
#include <thread>

namespace pibench {

Duration SystemClock::now() {
  return std::chrono::duration_cast<Duration>(
      std::chrono::steady_clock::now().time_since_epoch());
}

std::chrono::system_clock::time_point SystemClock::utc_now() {
  return std::chrono::system_clock::now();
}

void SystemClock::sleep_for(Duration d) {
  if (d > Duration::zero()) std::this_thread::sleep_for(d);
}

Duration ManualClock::now() {
  std::lock_guard lock(mutex_);
  return elapsed_;
}

std::chrono::system_clock::time_point ManualClock::utc_now() {
  std::lock_guard lock(mutex_);
  return utc_origin_ + std::chrono::duration_cast<std::chrono::system_clock::duration>(elapsed_);
}

void ManualClock::sleep_for(Duration d) {
  if (d <= Duration::zero()) return;
  std::lock_guard lock(mutex_);
  elapsed_ += d;
}

Duration ManualClock::slept() const {
  std::lock_guard lock(mutex_);
  return elapsed_;
}

std::string format_utc_iso8601(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace pibench
