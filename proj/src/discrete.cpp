#include "mitk/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "mitk/error.hpp"

namespace mitk::discrete {
namespace {

void check_mass(std::span<const double> probs, const char* what) {
  double total = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0, std::string(what) + ": probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": probabilities sum to " << total << ", expected 1 within " << kMassTolerance;
    throw ContractViolation(os.str());
  }
}

void check_labels(const Alphabet& alphabet, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& label : alphabet) {
    require(seen.insert(label).second, std::string(what) + ": duplicate label '" + label + "'");
  }
}

std::size_t product_of(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t k = shape.size(); k-- > 1;) strides[k - 1] = strides[k] * shape[k];
  return strides;
}

// Sum in ascending order so the result does not depend on the traversal
// order of the table (transposes give bit-identical sums).
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

}  // namespace

Alphabet index_alphabet(std::size_t n, std::string_view prefix) {
  Alphabet labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::string(prefix) + std::to_string(i));
  return labels;
}

// ---- Pmf --------------------------------------------------------------------

Pmf::Pmf(Alphabet alphabet, std::vector<double> probs) : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
  require(!probs_.empty(), "Pmf: empty alphabet");
  require(alphabet_.size() == probs_.size(), "Pmf: alphabet and probability lengths differ");
  check_labels(alphabet_, "Pmf");
  check_mass(probs_, "Pmf");
}

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  alphabet_ = index_alphabet(probs_.size());
  require(!probs_.empty(), "Pmf: empty alphabet");
  check_mass(probs_, "Pmf");
}

Pmf Pmf::uniform(Alphabet alphabet) {
  const std::size_t n = alphabet.size();
  require(n > 0, "Pmf::uniform: empty alphabet");
  return Pmf(std::move(alphabet), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double Pmf::prob(std::string_view label) const {
  const auto it = std::find(alphabet_.begin(), alphabet_.end(), label);
  require(it != alphabet_.end(), "Pmf: unknown label '" + std::string(label) + "'");
  return probs_[static_cast<std::size_t>(it - alphabet_.begin())];
}

bool Pmf::has_full_support() const noexcept {
  return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; });
}

// ---- JointPmf2 --------------------------------------------------------------

JointPmf2::JointPmf2(Alphabet rows, Alphabet cols, std::vector<double> probs)
    : rows_(std::move(rows)), cols_(std::move(cols)), probs_(std::move(probs)) {
  require(!rows_.empty() && !cols_.empty(), "JointPmf2: empty alphabet");
  require(probs_.size() == rows_.size() * cols_.size(), "JointPmf2: table size does not match alphabets");
  check_labels(rows_, "JointPmf2 rows");
  check_labels(cols_, "JointPmf2 cols");
  check_mass(probs_, "JointPmf2");
}

JointPmf2::JointPmf2(std::size_t rows, std::size_t cols, std::vector<double> probs)
    : JointPmf2(index_alphabet(rows), index_alphabet(cols), std::move(probs)) {}

JointPmf2 JointPmf2::product(const Pmf& rows, const Pmf& cols) {
  std::vector<double> cells;
  cells.reserve(rows.size() * cols.size());
  for (double pr : rows.probs())
    for (double pc : cols.probs()) cells.push_back(pr * pc);
  return JointPmf2(rows.alphabet(), cols.alphabet(), std::move(cells));
}

Pmf JointPmf2::row_marginal() const {
  std::vector<double> m(rows(), 0.0);
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t c = 0; c < cols(); ++c) m[r] += at(r, c);
  return Pmf(rows_, std::move(m));
}

Pmf JointPmf2::col_marginal() const {
  std::vector<double> m(cols(), 0.0);
  for (std::size_t c = 0; c < cols(); ++c)
    for (std::size_t r = 0; r < rows(); ++r) m[c] += at(r, c);
  return Pmf(cols_, std::move(m));
}

JointPmf2 JointPmf2::transposed() const {
  std::vector<double> t(probs_.size());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t c = 0; c < cols(); ++c) t[c * rows() + r] = at(r, c);
  return JointPmf2(cols_, rows_, std::move(t));
}

Pmf JointPmf2::flattened() const {
  Alphabet labels;
  labels.reserve(probs_.size());
  for (const auto& r : rows_)
    for (const auto& c : cols_) labels.push_back(r + "|" + c);
  return Pmf(std::move(labels), probs_);
}

// ---- CondPmf ----------------------------------------------------------------

CondPmf::CondPmf(Alphabet given, Alphabet target, std::vector<double> probs)
    : given_(std::move(given)), target_(std::move(target)), probs_(std::move(probs)) {
  require(!given_.empty() && !target_.empty(), "CondPmf: empty alphabet");
  require(probs_.size() == given_.size() * target_.size(), "CondPmf: table size does not match alphabets");
  check_labels(given_, "CondPmf given");
  check_labels(target_, "CondPmf target");
  for (std::size_t g = 0; g < given_.size(); ++g) {
    check_mass(std::span<const double>(probs_).subspan(g * target_.size(), target_.size()), "CondPmf row");
  }
}

CondPmf::CondPmf(std::size_t given, std::size_t target, std::vector<double> probs)
    : CondPmf(index_alphabet(given), index_alphabet(target), std::move(probs)) {}

Pmf CondPmf::row(std::size_t g) const {
  const auto first = probs_.begin() + static_cast<std::ptrdiff_t>(g * target_size());
  return Pmf(target_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(target_size())));
}

// ---- JointPmfN --------------------------------------------------------------

JointPmfN::JointPmfN(std::vector<Alphabet> alphabets, std::vector<double> probs)
    : alphabets_(std::move(alphabets)), probs_(std::move(probs)) {
  shape_.reserve(alphabets_.size());
  for (const auto& a : alphabets_) {
    require(!a.empty(), "JointPmfN: empty alphabet");
    check_labels(a, "JointPmfN");
    shape_.push_back(a.size());
  }
  require(probs_.size() == product_of(shape_), "JointPmfN: table size does not match alphabets");
  check_mass(probs_, "JointPmfN");
}

JointPmfN::JointPmfN(std::vector<std::size_t> shape, std::vector<double> probs)
    : JointPmfN(
          [&] {
            std::vector<Alphabet> a;
            for (std::size_t s : shape) a.push_back(index_alphabet(s));
            return a;
          }(),
          std::move(probs)) {}

double JointPmfN::at(std::span<const std::size_t> index) const {
  require(index.size() == rank(), "JointPmfN::at: index rank mismatch");
  const auto strides = strides_of(shape_);
  std::size_t flat = 0;
  for (std::size_t k = 0; k < rank(); ++k) {
    require(index[k] < shape_[k], "JointPmfN::at: index out of range");
    flat += index[k] * strides[k];
  }
  return probs_[flat];
}

JointPmfN JointPmfN::marginal(std::span<const std::size_t> axes) const {
  std::vector<Alphabet> out_alphabets;
  std::vector<std::size_t> out_shape;
  std::vector<bool> used(rank(), false);
  for (std::size_t a : axes) {
    require(a < rank(), "JointPmfN::marginal: axis out of range");
    require(!used[a], "JointPmfN::marginal: repeated axis");
    used[a] = true;
    out_alphabets.push_back(alphabets_[a]);
    out_shape.push_back(shape_[a]);
  }
  const auto out_strides = strides_of(out_shape);
  std::vector<double> out(product_of(out_shape), 0.0);

  std::vector<std::size_t> index(rank(), 0);
  for (double p : probs_) {
    std::size_t target = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) target += index[axes[k]] * out_strides[k];
    out[target] += p;
    for (std::size_t k = rank(); k-- > 0;) {
      if (++index[k] < shape_[k]) break;
      index[k] = 0;
    }
  }
  return JointPmfN(std::move(out_alphabets), std::move(out));
}

JointPmf2 JointPmfN::pair(std::size_t row_axis, std::size_t col_axis) const {
  const std::size_t axes[] = {row_axis, col_axis};
  JointPmfN m = marginal(axes);
  return JointPmf2(m.alphabets()[0], m.alphabets()[1], std::vector<double>(m.probs().begin(), m.probs().end()));
}

// ---- conversions ------------------------------------------------------------

JointPmf2 joint_from(const Pmf& given, const CondPmf& channel) {
  require(given.alphabet() == channel.given_alphabet(), "joint_from: alphabet mismatch");
  std::vector<double> cells;
  cells.reserve(channel.given_size() * channel.target_size());
  for (std::size_t g = 0; g < channel.given_size(); ++g)
    for (std::size_t t = 0; t < channel.target_size(); ++t) cells.push_back(given[g] * channel.at(g, t));
  return JointPmf2(channel.given_alphabet(), channel.target_alphabet(), std::move(cells));
}

CondPmf conditional_of(const JointPmf2& j, Axis given) {
  const JointPmf2 oriented = given == Axis::kRows ? j : j.transposed();
  const Pmf marginal = oriented.row_marginal();
  std::vector<double> cells;
  cells.reserve(oriented.probs().size());
  for (std::size_t r = 0; r < oriented.rows(); ++r) {
    for (std::size_t c = 0; c < oriented.cols(); ++c) {
      cells.push_back(marginal[r] > 0.0 ? oriented.at(r, c) / marginal[r]
                                        : 1.0 / static_cast<double>(oriented.cols()));
    }
  }
  return CondPmf(oriented.row_alphabet(), oriented.col_alphabet(), std::move(cells));
}

// ---- entropies --------------------------------------------------------------

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy(const Pmf& p) { return entropy(p.probs()); }

double joint_entropy(const JointPmf2& j) { return entropy(j.probs()); }

double joint_entropy(const JointPmfN& j) { return entropy(j.probs()); }

double conditional_entropy(const JointPmf2& j, Axis given) {
  const Pmf m = j.marginal(given);
  double h = 0.0;
  for (std::size_t r = 0; r < j.rows(); ++r) {
    for (std::size_t c = 0; c < j.cols(); ++c) {
      const double p = j.at(r, c);
      if (p == 0.0) continue;
      const double pg = given == Axis::kRows ? m[r] : m[c];
      h -= p * std::log(p / pg);
    }
  }
  return h;
}

double conditional_entropy(const JointPmfN& j, std::span<const std::size_t> target,
                           std::span<const std::size_t> given) {
  std::vector<std::size_t> both(given.begin(), given.end());
  both.insert(both.end(), target.begin(), target.end());
  const JointPmfN cells = j.marginal(both);
  const JointPmfN cond = j.marginal(given);

  // `given` axes lead in `both`, so the conditioning cell of flat index m is
  // m / (number of target cells).
  std::size_t target_cells = 1;
  for (std::size_t a : target) target_cells *= j.shape()[a];

  double h = 0.0;
  const auto probs = cells.probs();
  for (std::size_t m = 0; m < probs.size(); ++m) {
    const double p = probs[m];
    if (p == 0.0) continue;
    h -= p * std::log(p / cond.probs()[m / target_cells]);
  }
  return h;
}

// ---- divergences ------------------------------------------------------------

double kl_term(double p, double q) {
  if (p == 0.0) return 0.0;
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  return p * std::log(p / q);
}

ExtReal kl_divergence(const Pmf& p, const Pmf& q) {
  require(p.alphabet() == q.alphabet(), "kl_divergence: alphabet mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += kl_term(p[i], q[i]);
  // Rounding can leave a few ulp below zero when p and q nearly coincide.
  return ExtReal(std::max(total, 0.0));
}

ExtReal conditional_kl(const CondPmf& p, const CondPmf& q, const Pmf& weights) {
  require(p.given_alphabet() == q.given_alphabet() && p.target_alphabet() == q.target_alphabet(),
          "conditional_kl: alphabet mismatch");
  require(weights.alphabet() == p.given_alphabet(), "conditional_kl: weights must range over the given alphabet");
  ExtReal total = 0.0;
  for (std::size_t g = 0; g < p.given_size(); ++g) {
    total += weights[g] * kl_divergence(p.row(g), q.row(g));
  }
  return total;
}

FGenerator kl_generator() {
  return FGenerator{
      .name = "kl",
      .f = [](double t) { return t * std::log(t); },
      .f_at_zero = 0.0,
      .slope_at_infinity = std::numeric_limits<double>::infinity(),
      .perspective = [](double p, double q) { return kl_term(p, q); },
  };
}

FGenerator jensen_shannon_generator() {
  return FGenerator{
      .name = "js",
      .f = [](double t) { return t * std::log(2.0 * t / (1.0 + t)) + std::log(2.0 / (1.0 + t)); },
      .f_at_zero = std::log(2.0),
      .slope_at_infinity = std::log(2.0),
      .perspective = {},
  };
}

FGenerator total_variation_generator() {
  return FGenerator{
      .name = "tv",
      .f = [](double t) { return 0.5 * std::abs(t - 1.0); },
      .f_at_zero = 0.5,
      .slope_at_infinity = 0.5,
      .perspective = [](double p, double q) { return 0.5 * std::abs(p - q); },
  };
}

ExtReal f_divergence(const FGenerator& f, const Pmf& p, const Pmf& q) {
  require(p.alphabet() == q.alphabet(), "f_divergence: alphabet mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    const double qi = q[i];
    if (qi > 0.0) {
      if (f.perspective) {
        total += f.perspective(pi, qi);
      } else {
        total += pi == 0.0 ? qi * f.f_at_zero : qi * f.f(pi / qi);
      }
    } else if (pi > 0.0) {
      total += pi * f.slope_at_infinity;
    }
  }
  return ExtReal(std::max(total, 0.0));
}

ExtReal jensen_shannon(const Pmf& p, const Pmf& q) {
  require(p.alphabet() == q.alphabet(), "jensen_shannon: alphabet mismatch");
  std::vector<double> mid(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) mid[i] = 0.5 * (p[i] + q[i]);
  const Pmf m(p.alphabet(), std::move(mid));
  return kl_divergence(p, m) + kl_divergence(q, m);
}

double total_variation(const Pmf& p, const Pmf& q) {
  require(p.alphabet() == q.alphabet(), "total_variation: alphabet mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return 0.5 * total;
}

// ---- mutual information -----------------------------------------------------

double mutual_information(const JointPmf2& j) {
  const Pmf px = j.row_marginal();
  const Pmf py = j.col_marginal();
  std::vector<double> terms;
  terms.reserve(j.probs().size());
  for (std::size_t r = 0; r < j.rows(); ++r) {
    for (std::size_t c = 0; c < j.cols(); ++c) {
      const double p = j.at(r, c);
      if (p == 0.0) continue;
      terms.push_back(p * std::log(p / (px[r] * py[c])));
    }
  }
  return std::max(ordered_sum(terms), 0.0);
}

double mutual_information_kl_form(const JointPmf2& j) {
  const JointPmf2 product = JointPmf2::product(j.row_marginal(), j.col_marginal());
  return kl_divergence(j.flattened(), product.flattened()).value();
}

double mutual_information_entropy_form(const JointPmf2& j) {
  return entropy(j.row_marginal()) + entropy(j.col_marginal()) - joint_entropy(j);
}

namespace {

struct OtherAxes {
  std::size_t a;
  std::size_t b;
};

OtherAxes other_axes(const JointPmf3& j, std::size_t conditioning) {
  require(j.rank() == 3, "conditional mutual information needs a rank-3 table");
  require(conditioning < 3, "conditioning axis out of range");
  std::size_t others[2];
  std::size_t n = 0;
  for (std::size_t k = 0; k < 3; ++k)
    if (k != conditioning) others[n++] = k;
  return {others[0], others[1]};
}

}  // namespace

double conditional_mutual_information(const JointPmf3& j, std::size_t conditioning) {
  const auto [a, b] = other_axes(j, conditioning);
  const std::size_t target[] = {a};
  const std::size_t given_c[] = {conditioning};
  const std::size_t given_bc[] = {b, conditioning};
  return conditional_entropy(j, target, given_c) - conditional_entropy(j, target, given_bc);
}

double conditional_mutual_information_direct(const JointPmf3& j, std::size_t conditioning) {
  const auto [a, b] = other_axes(j, conditioning);
  const std::size_t ac_axes[] = {a, conditioning};
  const std::size_t bc_axes[] = {b, conditioning};
  const std::size_t c_axes[] = {conditioning};
  const JointPmfN pac = j.marginal(ac_axes);
  const JointPmfN pbc = j.marginal(bc_axes);
  const JointPmfN pc = j.marginal(c_axes);
  const auto& shape = j.shape();
  const std::size_t nc = shape[conditioning];

  double total = 0.0;
  std::size_t index[3] = {0, 0, 0};
  for (double p : j.probs()) {
    if (p > 0.0) {
      const std::size_t ia = index[a];
      const std::size_t ib = index[b];
      const std::size_t ic = index[conditioning];
      const double p_ac = pac.probs()[ia * nc + ic];
      const double p_bc = pbc.probs()[ib * nc + ic];
      const double p_c = pc.probs()[ic];
      total += p * std::log(p * p_c / (p_ac * p_bc));
    }
    for (std::size_t k = 3; k-- > 0;) {
      if (++index[k] < shape[k]) break;
      index[k] = 0;
    }
  }
  return total;
}

std::vector<double> mi_chain_rule_terms(const JointPmfN& j) {
  require(j.rank() >= 2, "mi_chain_rule_terms: need at least one input axis and the output axis");
  const std::size_t n = j.rank() - 1;
  require(n <= kMaxChainInputs, "mi_chain_rule_terms: at most " + std::to_string(kMaxChainInputs) + " input variables");
  const std::size_t y_axis = n;
  std::vector<double> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> prev(i);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    std::vector<std::size_t> prev_y = prev;
    prev_y.push_back(y_axis);
    const std::size_t target[] = {i};
    terms.push_back(conditional_entropy(j, target, prev) - conditional_entropy(j, target, prev_y));
  }
  return terms;
}

double joint_input_mutual_information(const JointPmfN& j) {
  require(j.rank() >= 2, "joint_input_mutual_information: need at least one input axis");
  const std::size_t cols = j.shape().back();
  const std::size_t rows = j.probs().size() / cols;
  return mutual_information(JointPmf2(rows, cols, std::vector<double>(j.probs().begin(), j.probs().end())));
}

}  // namespace mitk::discrete
