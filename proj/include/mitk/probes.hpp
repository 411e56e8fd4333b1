#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "mitk/discrete.hpp"
#include "mitk/execution.hpp"
#include "mitk/ext_real.hpp"

// Randomized property probes for the information-theoretic identities and
// inequalities. Each probe runs `trials` independent trials; trial t draws
// from its own counter stream derived from (seed, probe, t), so results do not
// depend on how trials are scheduled across threads.
namespace mitk::probes {

using mitk::Execution;

using KlOracle = std::function<ExtReal(const discrete::Pmf&, const discrete::Pmf&)>;

struct ProbeOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  Execution execution = Execution::kParallel;
  // Reference KL used wherever a probe compares against the exact divergence.
  KlOracle kl = discrete::kl_divergence;
};

// Accumulates checks of one probe. slack >= -tolerance passes; a strict check
// needs margin > 0.
class SlackTracker {
 public:
  template <typename Describe>
  void check(double slack, double tolerance, Describe&& describe) {
    ++checks_;
    const bool bad = !(slack >= -tolerance);
    if (bad) ++violations_;
    note(slack, bad, describe);
  }
  template <typename Describe>
  void check_strict(double margin, Describe&& describe) {
    ++checks_;
    const bool bad = !(margin > 0.0);
    if (bad) ++violations_;
    note(bad ? margin : 0.0, bad, describe);
  }
  // Appends other's counts; on equal slack the earlier witness is kept.
  void merge(const SlackTracker& other);

  [[nodiscard]] std::size_t checks() const noexcept { return checks_; }
  [[nodiscard]] std::size_t violations() const noexcept { return violations_; }
  [[nodiscard]] double worst_slack() const noexcept { return worst_slack_; }
  [[nodiscard]] const std::string& witness() const noexcept { return witness_; }

 private:
  template <typename Describe>
  void note(double slack, bool bad, Describe& describe) {
    // The first violation always becomes the witness; otherwise the tightest check.
    const bool first_bad = bad && !witness_bad_;
    if (first_bad || (bad == witness_bad_ && (slack < worst_slack_ || std::isnan(slack)))) {
      worst_slack_ = slack;
      witness_ = describe();
      witness_bad_ = bad;
    }
  }

  std::size_t checks_ = 0;
  std::size_t violations_ = 0;
  double worst_slack_ = std::numeric_limits<double>::infinity();
  std::string witness_;
  bool witness_bad_ = false;
};

struct ProbeLine {
  std::string id;
  std::size_t trials = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::string witness;
  [[nodiscard]] bool passed() const { return violations == 0; }
};

// Probe ids in suite order.
std::vector<std::string> probe_ids();
ProbeLine run_probe(std::string_view id, const ProbeOptions& options);
std::vector<ProbeLine> run_probe_suite(const ProbeOptions& options);

// KL shifted up by 1e-3: every probe that compares against the exact
// divergence should then fail.
KlOracle corrupted_kl_oracle();

// "<id> trials=<n> checks=<n> worst_slack=<x> tol=<x> PASS|FAIL [witness]".
std::string format_probe_line(const ProbeLine& line);

}  // namespace mitk::probes
