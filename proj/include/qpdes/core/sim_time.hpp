#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

#include "qpdes/core/error.hpp"

namespace qpdes {

/// Simulation time in integer picoseconds. The maximum representable value
/// is reserved as the +infinity sentinel (empty queues report it). Finite
/// arithmetic that would overflow throws TimeOverflow; infinity absorbs
/// additions so that `inf + lookahead` stays infinite.
class SimTime {
 public:
  using rep = std::int64_t;

  constexpr SimTime() = default;
  constexpr explicit SimTime(rep ps) : ps_(ps) {}

  static constexpr SimTime zero() { return SimTime(0); }
  static constexpr SimTime infinity() { return SimTime(std::numeric_limits<rep>::max()); }
  static constexpr SimTime ps(rep v) { return SimTime(v); }
  static constexpr SimTime ns(rep v) { return SimTime(v * 1000); }
  static constexpr SimTime us(rep v) { return SimTime(v * 1000 * 1000); }
  static constexpr SimTime ms(rep v) { return SimTime(v * 1000 * 1000 * 1000); }
  static constexpr SimTime s(rep v) { return SimTime(v * 1000 * 1000 * 1000 * 1000); }
  /// Rounds to the nearest picosecond.
  static SimTime from_seconds(double seconds);

  constexpr rep ticks() const { return ps_; }
  constexpr bool is_infinite() const { return ps_ == std::numeric_limits<rep>::max(); }
  double seconds() const { return static_cast<double>(ps_) * 1e-12; }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;

  friend SimTime operator+(SimTime a, SimTime b) {
    if (a.is_infinite() || b.is_infinite()) return infinity();
    rep out = 0;
    if (__builtin_add_overflow(a.ps_, b.ps_, &out) || out == std::numeric_limits<rep>::max()) {
      fail(ErrorCode::kTimeOverflow, "sim time addition overflows");
    }
    return SimTime(out);
  }
  friend SimTime operator-(SimTime a, SimTime b) {
    if (a.is_infinite()) return infinity();
    rep out = 0;
    if (__builtin_sub_overflow(a.ps_, b.ps_, &out) || out < 0) {
      fail(ErrorCode::kTimeOverflow, "sim time subtraction underflows");
    }
    return SimTime(out);
  }
  SimTime& operator+=(SimTime o) { return *this = *this + o; }

  std::string str() const;

 private:
  rep ps_ = 0;
};

}  // namespace qpdes
