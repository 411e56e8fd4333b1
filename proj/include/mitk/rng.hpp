#pragma once

#include <cstddef>
#include <cstdint>

namespace mitk {

// Counter-based generator: the i-th draw is a pure function of
// (seed, stream, i), so batches are reproducible independent of which thread
// produces them. Output mixing is the splitmix64 finalizer.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();
  // Exp(1) variate.
  double exponential();
  // Integer in [0, n).
  std::size_t below(std::size_t n);

  [[nodiscard]] std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);

// Disjoint stream namespaces so that e.g. training batches, evaluation
// batches and weight initialization never share draws for the same seed.
enum class StreamKind : std::uint64_t {
  kSample = 1,
  kTrainBatch = 2,
  kEvalBatch = 3,
  kInit = 4,
  kProbe = 5,
  kFinalEval = 6,
  kTest = 7,
};

constexpr std::uint64_t stream_id(StreamKind kind, std::uint64_t index) {
  return (static_cast<std::uint64_t>(kind) << 48) ^ index;
}

}  // namespace mitk
