#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

namespace mitk {

// A nonnegative-or-real quantity in nats that may also be +infinity.
// Divergences become infinite only when absolute continuity fails.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double value) : value_(value) {}  // NOLINT: implicit by design of the arithmetic

  static constexpr ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity()); }

  [[nodiscard]] bool is_infinite() const { return std::isinf(value_) && value_ > 0; }
  [[nodiscard]] bool is_finite() const { return std::isfinite(value_); }
  [[nodiscard]] constexpr double value() const { return value_; }

  ExtReal& operator+=(ExtReal other) {
    value_ += other.value_;
    return *this;
  }
  friend ExtReal operator+(ExtReal a, ExtReal b) { return ExtReal(a.value_ + b.value_); }
  // 0 * inf is taken as 0: a zero-weight term never contributes.
  friend ExtReal operator*(double w, ExtReal a) {
    if (w == 0.0) return ExtReal(0.0);
    return ExtReal(w * a.value_);
  }
  friend bool operator==(ExtReal a, ExtReal b) { return a.value_ == b.value_; }
  friend auto operator<=>(ExtReal a, ExtReal b) { return a.value_ <=> b.value_; }

  friend std::ostream& operator<<(std::ostream& os, ExtReal v) {
    if (v.is_infinite()) return os << "inf";
    return os << v.value_;
  }

 private:
  double value_ = 0.0;
};

}  // namespace mitk
