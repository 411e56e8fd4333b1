#include "mitk/rng.hpp"

#include <cmath>
#include <numbers>

namespace mitk {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ (stream * 0xD1B54A32D192ED03ull))) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ull);
}

double CounterRng::uniform() {
  // 53 random bits, centred in their cell so 0 and 1 are unreachable.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double CounterRng::exponential() { return -std::log(uniform()); }

std::size_t CounterRng::below(std::size_t n) {
  const unsigned __int128 wide = static_cast<unsigned __int128>((*this)()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

}  // namespace mitk
