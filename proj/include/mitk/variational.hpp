#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mitk/discrete.hpp"
#include "mitk/ext_real.hpp"
#include "mitk/rng.hpp"

// Executable forms of the variational identities and inequalities around
// mutual information: the auxiliary-distribution decomposition, the
// distance-to-product characterization, the Donsker-Varadhan and
// Gelfand-Yaglom-Perez suprema, convexity/concavity, Jensen, and the
// data-processing inequality.
namespace mitk::variational {

using discrete::Axis;
using discrete::CondPmf;
using discrete::JointPmf2;
using discrete::JointPmf3;
using discrete::Pmf;

// One finite real per alphabet symbol: a test function g for the DV form.
class CriticVector {
 public:
  explicit CriticVector(std::vector<double> values);
  static CriticVector constant(std::size_t n, double c) { return CriticVector(std::vector<double>(n, c)); }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Disjoint blocks of symbol indices whose union is the whole alphabet.
class Partition {
 public:
  Partition(std::size_t alphabet_size, std::vector<std::vector<std::size_t>> blocks);
  // From a restricted growth string: symbol i belongs to block rgs[i].
  static Partition from_growth_string(std::span<const std::size_t> rgs);
  static Partition singletons(std::size_t n);
  static Partition whole(std::size_t n);

  [[nodiscard]] std::size_t alphabet_size() const noexcept { return alphabet_size_; }
  [[nodiscard]] std::size_t block_count() const noexcept { return blocks_.size(); }
  [[nodiscard]] const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
  [[nodiscard]] std::vector<std::vector<std::string>> labels(const discrete::Alphabet& alphabet) const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::size_t alphabet_size_;
  std::vector<std::vector<std::size_t>> blocks_;
};

// Calls visit(rgs) for every set partition of {0..n-1} into at most
// max_blocks blocks, as restricted growth strings in lexicographic order
// (each partition exactly once).
void for_each_partition(std::size_t n, std::size_t max_blocks,
                        const std::function<void(std::span<const std::size_t>)>& visit);

// X -> Y -> Z.
class MarkovChainSpec {
 public:
  MarkovChainSpec(Pmf px, CondPmf py_given_x, CondPmf pz_given_y);

  [[nodiscard]] const Pmf& px() const noexcept { return px_; }
  [[nodiscard]] const CondPmf& py_given_x() const noexcept { return py_given_x_; }
  [[nodiscard]] const CondPmf& pz_given_y() const noexcept { return pz_given_y_; }

 private:
  Pmf px_;
  CondPmf py_given_x_;
  CondPmf pz_given_y_;
};

// Worst margin over a batch of checks. A check's slack is the amount by which
// its relation holds: rhs - lhs for lhs <= rhs, -|a - b| for a = b. Negative
// slack beyond the tolerance is a violation.
struct SlackReport {
  std::size_t checks = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::string witness;

  template <typename Describe>
  void record(double slack, Describe&& describe) {
    ++checks;
    if (slack < worst_slack || (std::isnan(slack) && !std::isnan(worst_slack))) {
      worst_slack = slack;
      witness = describe();
    }
  }
  [[nodiscard]] bool holds(double tolerance) const { return checks == 0 || worst_slack >= -tolerance; }
};

// ---- auxiliary-distribution identity ------------------------------------------

struct GoldenTerms {
  ExtReal conditional_term;  // D(P_{A|B} || Q_A | P_B)
  ExtReal penalty_term;      // D(P_A || Q_A)
  [[nodiscard]] double difference() const { return conditional_term.value() - penalty_term.value(); }
};

// With A the `auxiliary_axis` of j and B the other axis, returns the two
// divergences whose difference is I(A;B) for every Q_A with finite penalty.
// Support violations show up as infinite terms.
GoldenTerms golden_decomposition(const JointPmf2& j, const Pmf& q, Axis auxiliary_axis = Axis::kRows);

// ---- distance to product distributions ----------------------------------------

struct ProductFit {
  Pmf qx;
  Pmf qy;
  double value;
  // D(P_XY || Q_X Q_Y) at the start and after every block update.
  std::vector<double> history;
};

// Alternating exact minimization of D(P_XY || Q_X Q_Y) over Q_X then Q_Y,
// starting from uniform factors.
ProductFit product_distance_minimize(const JointPmf2& j, std::size_t iters);

// ---- Donsker-Varadhan ----------------------------------------------------------

// E_p[g] - ln E_q[e^g], with a max-shifted log-sum-exp.
double dv_value(const Pmf& p, const Pmf& q, const CriticVector& g);

struct DvOptimum {
  CriticVector g_star;
  double value;
  std::size_t steps_taken;
};

inline constexpr std::size_t kDvDefaultSteps = 2000;
inline constexpr double kDvDefaultStepSize = 0.5;

// Ascends dv_value over g from g = 0. Each step moves along the gradient
// p - r preconditioned by 1/r, where r is q tilted by e^g; the step is halved
// until the value does not decrease. Stops after `steps` steps or once the
// value has changed by less than 1e-12 over 10 consecutive steps.
// Requires p and q to have full support.
DvOptimum dv_supremum(const Pmf& p, const Pmf& q, std::size_t steps = kDvDefaultSteps,
                      double lr = kDvDefaultStepSize);

// ---- Gelfand-Yaglom-Perez ------------------------------------------------------

inline constexpr std::size_t kMaxGypAlphabet = 8;
inline constexpr std::size_t kMaxGypMiAlphabet = 5;

// sum_i P[E_i] ln(P[E_i] / Q[E_i]) for one partition.
ExtReal partition_divergence(const Pmf& p, const Pmf& q, const Partition& partition);

struct GypResult {
  Partition best;
  ExtReal value;
};

// Exhaustive supremum of partition_divergence over partitions with at most
// max_blocks blocks (alphabet size <= kMaxGypAlphabet).
GypResult gyp_supremum(const Pmf& p, const Pmf& q, std::size_t max_blocks);

// Supremum over rectangle partitions {E_i} x {F_j}, each side with at most
// max_blocks blocks (both alphabets <= kMaxGypMiAlphabet).
double gyp_mi_supremum(const JointPmf2& j, std::size_t max_blocks);

// ---- convexity probes ----------------------------------------------------------

// 0, 0.1, ..., 1.0 followed by `random_count` uniform draws from rng.
std::vector<double> alpha_grid(CounterRng& rng, std::size_t random_count = 20);
std::vector<double> fixed_alpha_grid();

struct PmfPair {
  Pmf p;
  Pmf q;
};

// D(a P1 + (1-a) P2 || a Q1 + (1-a) Q2) <= a D(P1||Q1) + (1-a) D(P2||Q2).
SlackReport kl_convexity_probe(const PmfPair& first, const PmfPair& second, std::span<const double> alphas);

// H(a P1 + (1-a) P2) >= a H(P1) + (1-a) H(P2).
SlackReport entropy_concavity_probe(const Pmf& first, const Pmf& second, std::span<const double> alphas);

// Input distribution and channel of I(X;Y) = I(P_X, P_{Y|X}).
struct MiFactors {
  Pmf px;
  CondPmf channel;
};

struct MiMixtureReport {
  SlackReport concavity_in_input;    // mixes first.px / second.px through first.channel
  SlackReport convexity_in_channel;  // mixes first.channel / second.channel under first.px
};

MiMixtureReport mi_concavity_convexity_probe(const MiFactors& first, const MiFactors& second,
                                             std::span<const double> alphas);

// ---- Jensen ---------------------------------------------------------------------

struct JensenPair {
  double lhs;  // E[f(V)]
  double rhs;  // f(E[V])
};

JensenPair jensen_probe(const std::function<double(double)>& f, const Pmf& p, std::span<const double> values);

// ---- Markov chains and data processing -------------------------------------------

// Table over (X, Y, Z) = P_X(x) P_{Y|X}(y|x) P_{Z|Y}(z|y).
JointPmf3 markov_joint(const MarkovChainSpec& spec);

struct DpiResult {
  double ixy;
  double ixz;
  double ixy_given_z;
  double ixz_given_y;  // zero for a Markov chain
};

DpiResult dpi_check(const MarkovChainSpec& spec);

}  // namespace mitk::variational
