#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>

namespace gwflow {

/// Fixed-point real with 32 fractional bits.
///
/// Every position and time inside the simulator is a Fixed. Kinks move as
/// x = c + t and antikinks as x = c - t, so with integer ticks all motion and
/// collision arithmetic is exact and a replay from any snapshot reproduces
/// the original run bit for bit. Values are exactly representable as double
/// as long as |value| < 2^21.
class Fixed {
 public:
  static constexpr int kFracBits = 32;
  static constexpr double kTicksPerUnit = 4294967296.0;  // 2^32
  static constexpr double kMaxMagnitude = 1u << 29;

  constexpr Fixed() = default;

  static constexpr Fixed from_ticks(std::int64_t ticks) {
    Fixed f;
    f.ticks_ = ticks;
    return f;
  }

  /// Nearest tick. Exact for any double that came out of to_double().
  static Fixed from_double(double v) {
    check_range(v);
    return from_ticks(std::llround(v * kTicksPerUnit));
  }

  /// Nearest even tick; external inputs (sampled creations, requested
  /// times, discretizer crossings) live on this grid.
  static Fixed grid(double v) {
    check_range(v);
    return from_ticks(2 * std::llround(v * kTicksPerUnit * 0.5));
  }

  static constexpr Fixed from_int(std::int64_t v) { return from_ticks(v << kFracBits); }

  constexpr std::int64_t ticks() const { return ticks_; }
  double to_double() const { return static_cast<double>(ticks_) / kTicksPerUnit; }

  constexpr Fixed operator-() const { return from_ticks(-ticks_); }
  constexpr Fixed& operator+=(Fixed o) {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr Fixed& operator-=(Fixed o) {
    ticks_ -= o.ticks_;
    return *this;
  }
  friend constexpr Fixed operator+(Fixed a, Fixed b) { return a += b; }
  friend constexpr Fixed operator-(Fixed a, Fixed b) { return a -= b; }
  friend constexpr Fixed operator*(std::int64_t k, Fixed a) { return from_ticks(k * a.ticks_); }

  friend constexpr auto operator<=>(Fixed, Fixed) = default;
  friend constexpr bool operator==(Fixed, Fixed) = default;

 private:
  static void check_range(double v) {
    if (!std::isfinite(v) || std::abs(v) >= kMaxMagnitude) {
      throw std::out_of_range("Fixed: value out of representable range");
    }
  }

  std::int64_t ticks_ = 0;
};

/// Floor division for signed integers (rounds toward -inf).
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Number of whole periods to subtract from x so that it lands in [lo, lo + period).
constexpr std::int64_t lap_index(Fixed x, Fixed lo, Fixed period) {
  return floor_div((x - lo).ticks(), period.ticks());
}

}  // namespace gwflow
