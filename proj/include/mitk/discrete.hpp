#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mitk/ext_real.hpp"

// Exact entropy, divergence and mutual-information computations on finite
// alphabets. Everything is in nats, with 0 ln 0 = 0 and 0 ln(0/0) = 0 applied
// before any ratio is formed.
namespace mitk::discrete {

// Construction-time tolerance on the total mass. Tables are never silently
// renormalized; the caller normalizes.
inline constexpr double kMassTolerance = 1e-12;

using Alphabet = std::vector<std::string>;

// Labels "0", "1", ..., "n-1" (optionally prefixed).
Alphabet index_alphabet(std::size_t n, std::string_view prefix = "");

class Pmf {
 public:
  Pmf(Alphabet alphabet, std::vector<double> probs);
  // Labels default to index_alphabet(probs.size()).
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(Alphabet alphabet);

  [[nodiscard]] const Alphabet& alphabet() const noexcept { return alphabet_; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return probs_[i]; }
  [[nodiscard]] double prob(std::string_view label) const;
  [[nodiscard]] bool has_full_support() const noexcept;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  Alphabet alphabet_;
  std::vector<double> probs_;
};

// Selects which axis of a 2-D table is conditioned on / marginalized.
enum class Axis { kRows, kCols };

class JointPmf2 {
 public:
  // probs is row-major, rows.size() x cols.size().
  JointPmf2(Alphabet rows, Alphabet cols, std::vector<double> probs);
  JointPmf2(std::size_t rows, std::size_t cols, std::vector<double> probs);

  // The outer product p x q.
  static JointPmf2 product(const Pmf& rows, const Pmf& cols);

  [[nodiscard]] const Alphabet& row_alphabet() const noexcept { return rows_; }
  [[nodiscard]] const Alphabet& col_alphabet() const noexcept { return cols_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_.size(); }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return probs_[r * cols() + c]; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

  [[nodiscard]] Pmf row_marginal() const;
  [[nodiscard]] Pmf col_marginal() const;
  [[nodiscard]] Pmf marginal(Axis axis) const { return axis == Axis::kRows ? row_marginal() : col_marginal(); }
  [[nodiscard]] JointPmf2 transposed() const;
  // Cells as a single Pmf with labels "row|col", row-major.
  [[nodiscard]] Pmf flattened() const;

  friend bool operator==(const JointPmf2&, const JointPmf2&) = default;

 private:
  Alphabet rows_;
  Alphabet cols_;
  std::vector<double> probs_;
};

// A channel: one Pmf over `target` per symbol of `given`.
class CondPmf {
 public:
  CondPmf(Alphabet given, Alphabet target, std::vector<double> probs);
  CondPmf(std::size_t given, std::size_t target, std::vector<double> probs);

  [[nodiscard]] const Alphabet& given_alphabet() const noexcept { return given_; }
  [[nodiscard]] const Alphabet& target_alphabet() const noexcept { return target_; }
  [[nodiscard]] std::size_t given_size() const noexcept { return given_.size(); }
  [[nodiscard]] std::size_t target_size() const noexcept { return target_.size(); }
  [[nodiscard]] double at(std::size_t g, std::size_t t) const { return probs_[g * target_size() + t]; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] Pmf row(std::size_t g) const;

  friend bool operator==(const CondPmf&, const CondPmf&) = default;

 private:
  Alphabet given_;
  Alphabet target_;
  std::vector<double> probs_;
};

// Rank-N table, row-major (last axis varies fastest). Used for the
// three-variable quantities and for the MI chain rule over (X_1..X_n, Y).
class JointPmfN {
 public:
  JointPmfN(std::vector<Alphabet> alphabets, std::vector<double> probs);
  JointPmfN(std::vector<std::size_t> shape, std::vector<double> probs);

  [[nodiscard]] std::size_t rank() const noexcept { return alphabets_.size(); }
  [[nodiscard]] const std::vector<Alphabet>& alphabets() const noexcept { return alphabets_; }
  [[nodiscard]] const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] double at(std::span<const std::size_t> index) const;

  // Sums out every axis not listed; the result keeps `axes` in the given order.
  [[nodiscard]] JointPmfN marginal(std::span<const std::size_t> axes) const;
  // Two-axis marginal as a JointPmf2 (rows = first axis).
  [[nodiscard]] JointPmf2 pair(std::size_t row_axis, std::size_t col_axis) const;

 private:
  std::vector<Alphabet> alphabets_;
  std::vector<std::size_t> shape_;
  std::vector<double> probs_;
};

// Rank-3 tables over (X, Y, Z); rank is checked by the operations that need it.
using JointPmf3 = JointPmfN;

// Materializes P_given(g) * P_target|given(t | g) with rows = given.
JointPmf2 joint_from(const Pmf& given, const CondPmf& channel);
// P_{target|given} read off a 2-D table. Rows whose conditioning mass is zero
// are filled with the uniform distribution (they carry zero weight anyway).
CondPmf conditional_of(const JointPmf2& j, Axis given);

// ---- entropies -------------------------------------------------------------

double entropy(const Pmf& p);
double entropy(std::span<const double> probs);
double joint_entropy(const JointPmf2& j);
double joint_entropy(const JointPmfN& j);
// H(target | given) by direct summation of -p(a,b) ln p(a|b). Conditioning
// cells with zero mass contribute nothing.
double conditional_entropy(const JointPmf2& j, Axis given);
// H(target axes | given axes) on a rank-N table, same direct summation.
double conditional_entropy(const JointPmfN& j, std::span<const std::size_t> target,
                           std::span<const std::size_t> given);

// ---- divergences -----------------------------------------------------------

// One summand p ln(p/q) with the zero-mass conventions; +inf when q = 0 < p.
double kl_term(double p, double q);

ExtReal kl_divergence(const Pmf& p, const Pmf& q);
// sum_x w(x) KL(p(.|x) || q(.|x)); infinity propagates unless its weight is 0.
ExtReal conditional_kl(const CondPmf& p, const CondPmf& q, const Pmf& weights);

// Generator of an f-divergence D_f(P||Q) = sum_x q(x) f(p(x)/q(x)).
struct FGenerator {
  std::string name;
  std::function<double(double)> f;
  // Value of f(0): the summand for p = 0 < q is q * f(0).
  double f_at_zero = 0.0;
  // lim_{t->inf} f(t)/t: the summand for q = 0 < p is p times this (may be inf).
  double slope_at_infinity = 0.0;
  // Optional closed-form perspective q f(p/q) for q > 0; used instead of the
  // generic product when present (keeps the KL instance bit-identical to
  // kl_divergence).
  std::function<double(double, double)> perspective;
};

FGenerator kl_generator();
// JS(P||Q) = KL(P || M) + KL(Q || M), M = (P+Q)/2 (no 1/2 factor).
FGenerator jensen_shannon_generator();
// TV(P, Q) = 1/2 sum |p - q|.
FGenerator total_variation_generator();

ExtReal f_divergence(const FGenerator& f, const Pmf& p, const Pmf& q);
ExtReal jensen_shannon(const Pmf& p, const Pmf& q);
double total_variation(const Pmf& p, const Pmf& q);

// ---- mutual information ----------------------------------------------------

// Direct double sum of p(x,y) ln[p(x,y) / (p(x) p(y))].
double mutual_information(const JointPmf2& j);
// KL(P_XY || P_X P_Y) on the flattened tables.
double mutual_information_kl_form(const JointPmf2& j);
// H(X) + H(Y) - H(X,Y).
double mutual_information_entropy_form(const JointPmf2& j);

// I(A; B | C) for the rank-3 table, C = `conditioning` axis, A and B the other
// two in ascending order. Computed as H(A|C) - H(A|B,C).
double conditional_mutual_information(const JointPmf3& j, std::size_t conditioning);
// Same quantity by direct summation of p ln[p(a,b|c) / (p(a|c) p(b|c))].
double conditional_mutual_information_direct(const JointPmf3& j, std::size_t conditioning);

inline constexpr std::size_t kMaxChainInputs = 4;

// Terms I(X_i; Y | X_{i-1}, ..., X_1), i = 1..n, for a table over
// (X_1, ..., X_n, Y) with Y the last axis and n <= kMaxChainInputs.
std::vector<double> mi_chain_rule_terms(const JointPmfN& j);
// I(X_1..X_n; Y) with the inputs flattened into one row variable.
double joint_input_mutual_information(const JointPmfN& j);

}  // namespace mitk::discrete
