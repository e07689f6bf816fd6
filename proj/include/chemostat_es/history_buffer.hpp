#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "chemostat_es/errors.hpp"

namespace chemostat_es {

/// Number of fixed steps spanned by a delay; the delay must be a whole multiple of dt.
inline std::size_t delay_steps(double delay, double dt) {
  if (!(delay >= 0.0) || !(dt > 0.0)) {
    throw ConfigError("delay must be non-negative and dt positive");
  }
  const double ratio = delay / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("delay must be an integer multiple of the time step");
  }
  return static_cast<std::size_t>(rounded);
}

/// Ring buffer returning the value pushed `lag` pushes ago, or the first
/// value ever pushed while fewer than `lag` pushes have happened.
template <class T>
class HistoryBuffer {
public:
  explicit HistoryBuffer(std::size_t lag = 0) : lag_(lag), ring_(lag + 1) {}

  std::size_t lag() const noexcept { return lag_; }
  std::size_t capacity() const noexcept { return ring_.size(); }

  void push(const T& value) {
    if (count_ == 0) {
      initial_ = value;
    }
    ring_[head_] = value;
    head_ = (head_ + 1) % ring_.size();
    ++count_;
  }

  /// Requires at least one push.
  const T& delayed() const {
    if (count_ == 0) {
      throw ConfigError("history buffer queried before any value was stored");
    }
    if (count_ <= lag_) {
      return initial_;
    }
    // head_ is the slot after the newest; the oldest retained entry sits there.
    return ring_[head_];
  }

  void clear() {
    head_ = 0;
    count_ = 0;
  }

private:
  std::size_t lag_;
  std::vector<T> ring_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  T initial_{};
};

}  // namespace chemostat_es
