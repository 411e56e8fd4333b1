#include "mitk/variational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mitk/error.hpp"

namespace mitk::variational {
namespace {

void require_same_alphabet(const Pmf& p, const Pmf& q, const char* what) {
  require(p.alphabet() == q.alphabet(), std::string(what) + ": alphabets differ");
}

// Row-normalized mixture a*first + (1-a)*second, rows of a CondPmf.
CondPmf mix_channels(const CondPmf& first, const CondPmf& second, double a) {
  std::vector<double> probs(first.probs().size());
  for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = a * first.probs()[k] + (1.0 - a) * second.probs()[k];
  return CondPmf(first.given_alphabet(), first.target_alphabet(), std::move(probs));
}

Pmf mix(const Pmf& first, const Pmf& second, double a) {
  std::vector<double> probs(first.size());
  for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = a * first[k] + (1.0 - a) * second[k];
  return Pmf(first.alphabet(), std::move(probs));
}

std::string alpha_witness(double a) {
  std::ostringstream os;
  os.precision(17);
  os << "alpha=" << a;
  return os.str();
}

// Block masses of p under the growth string rgs.
void block_masses(std::span<const double> p, std::span<const std::size_t> rgs, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) out[rgs[i]] += p[i];
}

std::size_t block_count_of(std::span<const std::size_t> rgs) {
  return rgs.empty() ? 0 : *std::max_element(rgs.begin(), rgs.end()) + 1;
}

double log_sum_exp_weighted(std::span<const double> q, std::span<const double> g) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0.0) m = std::max(m, g[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0.0) s += q[i] * std::exp(g[i] - m);
  return m + std::log(s);
}

}  // namespace

CriticVector::CriticVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) require(std::isfinite(v), "CriticVector: entries must be finite");
}

// ---- Partition ----------------------------------------------------------------

Partition::Partition(std::size_t alphabet_size, std::vector<std::vector<std::size_t>> blocks)
    : alphabet_size_(alphabet_size), blocks_(std::move(blocks)) {
  std::vector<bool> seen(alphabet_size_, false);
  std::size_t covered = 0;
  for (const auto& block : blocks_) {
    require(!block.empty(), "Partition: empty block");
    for (std::size_t s : block) {
      require(s < alphabet_size_, "Partition: symbol index out of range");
      require(!seen[s], "Partition: blocks overlap");
      seen[s] = true;
      ++covered;
    }
  }
  require(covered == alphabet_size_, "Partition: blocks do not cover the alphabet");
}

Partition Partition::from_growth_string(std::span<const std::size_t> rgs) {
  std::vector<std::vector<std::size_t>> blocks(block_count_of(rgs));
  for (std::size_t i = 0; i < rgs.size(); ++i) blocks[rgs[i]].push_back(i);
  return Partition(rgs.size(), std::move(blocks));
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < n; ++i) blocks.push_back({i});
  return Partition(n, std::move(blocks));
}

Partition Partition::whole(std::size_t n) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return Partition(n, {all});
}

std::vector<std::vector<std::string>> Partition::labels(const discrete::Alphabet& alphabet) const {
  require(alphabet.size() == alphabet_size_, "Partition::labels: alphabet size differs");
  std::vector<std::vector<std::string>> out;
  for (const auto& block : blocks_) {
    auto& names = out.emplace_back();
    for (std::size_t s : block) names.push_back(alphabet[s]);
  }
  return out;
}

void for_each_partition(std::size_t n, std::size_t max_blocks,
                        const std::function<void(std::span<const std::size_t>)>& visit) {
  if (n == 0 || max_blocks == 0) return;
  // rgs[i] <= 1 + max(rgs[0..i-1]); prefix_max[i] = max(rgs[0..i]).
  std::vector<std::size_t> rgs(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  while (true) {
    visit(rgs);
    // Advance to the next growth string with at most max_blocks blocks.
    std::size_t i = n;
    while (i-- > 1) {
      const std::size_t limit = std::min(prefix_max[i - 1] + 1, max_blocks - 1);
      if (rgs[i] < limit) break;
    }
    if (i == 0) return;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t k = i + 1; k < n; ++k) {
      rgs[k] = 0;
      prefix_max[k] = prefix_max[i];
    }
  }
}

// ---- MarkovChainSpec -------------------------------------------------------------

MarkovChainSpec::MarkovChainSpec(Pmf px, CondPmf py_given_x, CondPmf pz_given_y)
    : px_(std::move(px)), py_given_x_(std::move(py_given_x)), pz_given_y_(std::move(pz_given_y)) {
  require(py_given_x_.given_alphabet() == px_.alphabet(), "MarkovChainSpec: P_{Y|X} is not indexed by X's alphabet");
  require(pz_given_y_.given_alphabet() == py_given_x_.target_alphabet(),
          "MarkovChainSpec: P_{Z|Y} is not indexed by Y's alphabet");
}

// ---- golden decomposition ------------------------------------------------------

GoldenTerms golden_decomposition(const JointPmf2& j, const Pmf& q, Axis auxiliary_axis) {
  const Pmf pa = j.marginal(auxiliary_axis);
  require_same_alphabet(pa, q, "golden_decomposition");
  const Axis other = auxiliary_axis == Axis::kRows ? Axis::kCols : Axis::kRows;
  const Pmf pb = j.marginal(other);
  const CondPmf pa_given_b = discrete::conditional_of(j, other);

  std::vector<double> repeated;
  repeated.reserve(pa_given_b.probs().size());
  for (std::size_t b = 0; b < pb.size(); ++b) repeated.insert(repeated.end(), q.probs().begin(), q.probs().end());
  const CondPmf q_rows(pa_given_b.given_alphabet(), pa_given_b.target_alphabet(), std::move(repeated));

  return GoldenTerms{discrete::conditional_kl(pa_given_b, q_rows, pb), discrete::kl_divergence(pa, q)};
}

// ---- distance to product -------------------------------------------------------

ProductFit product_distance_minimize(const JointPmf2& j, std::size_t iters) {
  require(iters >= 1, "product_distance_minimize: iters must be >= 1");
  const Pmf flat = j.flattened();
  auto distance = [&](const Pmf& qx, const Pmf& qy) {
    return discrete::kl_divergence(flat, JointPmf2::product(qx, qy).flattened()).value();
  };

  Pmf qx = Pmf::uniform(j.row_alphabet());
  Pmf qy = Pmf::uniform(j.col_alphabet());
  std::vector<double> history{distance(qx, qy)};
  for (std::size_t it = 0; it < iters; ++it) {
    // For fixed Q_Y, D(P_XY || Q_X Q_Y) = const - sum_x P_X(x) ln Q_X(x), which
    // is minimized over the simplex at Q_X = P_X; symmetrically for Q_Y.
    qx = j.row_marginal();
    history.push_back(distance(qx, qy));
    qy = j.col_marginal();
    history.push_back(distance(qx, qy));
  }
  const double value = history.back();
  return ProductFit{std::move(qx), std::move(qy), value, std::move(history)};
}

// ---- Donsker-Varadhan --------------------------------------------------------------

double dv_value(const Pmf& p, const Pmf& q, const CriticVector& g) {
  require_same_alphabet(p, q, "dv_value");
  require(g.size() == p.size(), "dv_value: critic length differs from the alphabet size");
  double mean_g = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean_g += p[i] * g[i];
  return mean_g - log_sum_exp_weighted(q.probs(), g.values());
}

DvOptimum dv_supremum(const Pmf& p, const Pmf& q, std::size_t steps, double lr) {
  require_same_alphabet(p, q, "dv_supremum");
  require(p.has_full_support() && q.has_full_support(), "dv_supremum: p and q must have full support");
  require(lr > 0.0, "dv_supremum: lr must be positive");
  constexpr double kTolerance = 1e-12;
  constexpr std::size_t kWindow = 10;
  constexpr int kMaxHalvings = 60;

  const std::size_t n = p.size();
  std::vector<double> g(n, 0.0);
  std::vector<double> trial(n);
  std::vector<double> tilted(n);
  double value = dv_value(p, q, CriticVector(g));
  std::vector<double> recent{value};
  std::size_t taken = 0;

  for (; taken < steps; ++taken) {
    const double lse = log_sum_exp_weighted(q.probs(), g);
    for (std::size_t i = 0; i < n; ++i) tilted[i] = q[i] * std::exp(g[i] - lse);

    double step = lr;
    double next = value;
    bool moved = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = g[i] + step * (p[i] - tilted[i]) / tilted[i];
      next = dv_value(p, q, CriticVector(trial));
      if (next >= value) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    g.swap(trial);
    value = next;
    recent.push_back(value);
    if (recent.size() > kWindow + 1) recent.erase(recent.begin());
    if (recent.size() == kWindow + 1 && recent.back() - recent.front() < kTolerance) {
      ++taken;
      break;
    }
  }
  return DvOptimum{CriticVector(std::move(g)), value, taken};
}

// ---- Gelfand-Yaglom-Perez ----------------------------------------------------------

ExtReal partition_divergence(const Pmf& p, const Pmf& q, const Partition& partition) {
  require_same_alphabet(p, q, "partition_divergence");
  require(partition.alphabet_size() == p.size(), "partition_divergence: partition is over a different alphabet");
  double total = 0.0;
  for (const auto& block : partition.blocks()) {
    double pe = 0.0;
    double qe = 0.0;
    for (std::size_t s : block) {
      pe += p[s];
      qe += q[s];
    }
    total += discrete::kl_term(pe, qe);
  }
  return ExtReal(total);
}

GypResult gyp_supremum(const Pmf& p, const Pmf& q, std::size_t max_blocks) {
  require_same_alphabet(p, q, "gyp_supremum");
  require(p.size() <= kMaxGypAlphabet, "gyp_supremum: alphabet larger than " + std::to_string(kMaxGypAlphabet));
  require(max_blocks >= 1, "gyp_supremum: max_blocks must be >= 1");

  std::vector<std::size_t> best_rgs;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> pb(p.size());
  std::vector<double> qb(p.size());
  for_each_partition(p.size(), max_blocks, [&](std::span<const std::size_t> rgs) {
    block_masses(p.probs(), rgs, pb);
    block_masses(q.probs(), rgs, qb);
    double total = 0.0;
    for (std::size_t b = 0, nb = block_count_of(rgs); b < nb; ++b) total += discrete::kl_term(pb[b], qb[b]);
    // Later (finer) partitions win ties so the singletons are reported when
    // they attain the supremum.
    if (total >= best) {
      best = total;
      best_rgs.assign(rgs.begin(), rgs.end());
    }
  });
  // Each partition value is a divergence of the induced block distributions.
  return GypResult{Partition::from_growth_string(best_rgs), ExtReal(std::max(best, 0.0))};
}

double gyp_mi_supremum(const JointPmf2& j, std::size_t max_blocks) {
  require(j.rows() <= kMaxGypMiAlphabet && j.cols() <= kMaxGypMiAlphabet,
          "gyp_mi_supremum: alphabets larger than " + std::to_string(kMaxGypMiAlphabet));
  require(max_blocks >= 1, "gyp_mi_supremum: max_blocks must be >= 1");

  std::vector<std::vector<std::size_t>> row_parts;
  std::vector<std::vector<std::size_t>> col_parts;
  for_each_partition(j.rows(), max_blocks, [&](auto rgs) { row_parts.emplace_back(rgs.begin(), rgs.end()); });
  for_each_partition(j.cols(), max_blocks, [&](auto rgs) { col_parts.emplace_back(rgs.begin(), rgs.end()); });

  const Pmf px = j.row_marginal();
  const Pmf py = j.col_marginal();
  double best = 0.0;
  std::vector<double> cell;
  std::vector<double> terms;
  std::vector<double> pe(j.rows());
  std::vector<double> pf(j.cols());
  for (const auto& rr : row_parts) {
    const std::size_t nr = block_count_of(rr);
    block_masses(px.probs(), rr, pe);
    for (const auto& cc : col_parts) {
      const std::size_t nc = block_count_of(cc);
      block_masses(py.probs(), cc, pf);
      cell.assign(nr * nc, 0.0);
      for (std::size_t r = 0; r < j.rows(); ++r)
        for (std::size_t c = 0; c < j.cols(); ++c) cell[rr[r] * nc + cc[c]] += j.at(r, c);
      terms.clear();
      for (std::size_t a = 0; a < nr; ++a)
        for (std::size_t b = 0; b < nc; ++b) {
          const double m = cell[a * nc + b];
          if (m > 0.0) terms.push_back(m * std::log(m / (pe[a] * pf[b])));
        }
      std::sort(terms.begin(), terms.end());
      double total = 0.0;
      for (double t : terms) total += t;
      best = std::max(best, total);
    }
  }
  return best;
}

// ---- convexity probes --------------------------------------------------------------

std::vector<double> fixed_alpha_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
  return grid;
}

std::vector<double> alpha_grid(CounterRng& rng, std::size_t random_count) {
  std::vector<double> grid = fixed_alpha_grid();
  for (std::size_t k = 0; k < random_count; ++k) grid.push_back(rng.uniform());
  return grid;
}

SlackReport kl_convexity_probe(const PmfPair& first, const PmfPair& second, std::span<const double> alphas) {
  require_same_alphabet(first.p, second.p, "kl_convexity_probe");
  require_same_alphabet(first.p, first.q, "kl_convexity_probe");
  require_same_alphabet(second.p, second.q, "kl_convexity_probe");
  const ExtReal d1 = discrete::kl_divergence(first.p, first.q);
  const ExtReal d2 = discrete::kl_divergence(second.p, second.q);
  SlackReport report;
  for (double a : alphas) {
    require(a >= 0.0 && a <= 1.0, "kl_convexity_probe: alpha outside [0, 1]");
    const ExtReal lhs = discrete::kl_divergence(mix(first.p, second.p, a), mix(first.q, second.q, a));
    const ExtReal rhs = a * d1 + (1.0 - a) * d2;
    const double slack = rhs.is_infinite() ? std::numeric_limits<double>::infinity() : rhs.value() - lhs.value();
    report.record(slack, [&] { return alpha_witness(a); });
  }
  return report;
}

SlackReport entropy_concavity_probe(const Pmf& first, const Pmf& second, std::span<const double> alphas) {
  require_same_alphabet(first, second, "entropy_concavity_probe");
  const double h1 = discrete::entropy(first);
  const double h2 = discrete::entropy(second);
  SlackReport report;
  for (double a : alphas) {
    require(a >= 0.0 && a <= 1.0, "entropy_concavity_probe: alpha outside [0, 1]");
    const double slack = discrete::entropy(mix(first, second, a)) - (a * h1 + (1.0 - a) * h2);
    report.record(slack, [&] { return alpha_witness(a); });
  }
  return report;
}

MiMixtureReport mi_concavity_convexity_probe(const MiFactors& first, const MiFactors& second,
                                             std::span<const double> alphas) {
  require_same_alphabet(first.px, second.px, "mi_concavity_convexity_probe");
  require(first.channel.given_alphabet() == first.px.alphabet() &&
              second.channel.given_alphabet() == second.px.alphabet() &&
              first.channel.target_alphabet() == second.channel.target_alphabet(),
          "mi_concavity_convexity_probe: channel alphabets do not match");

  auto mi = [](const Pmf& px, const CondPmf& ch) { return discrete::mutual_information(discrete::joint_from(px, ch)); };
  const double input1 = mi(first.px, first.channel);
  const double input2 = mi(second.px, first.channel);
  const double chan2 = mi(first.px, second.channel);

  MiMixtureReport report;
  for (double a : alphas) {
    require(a >= 0.0 && a <= 1.0, "mi_concavity_convexity_probe: alpha outside [0, 1]");
    const double concave = mi(mix(first.px, second.px, a), first.channel) - (a * input1 + (1.0 - a) * input2);
    report.concavity_in_input.record(concave, [&] { return alpha_witness(a); });
    const double convex = (a * input1 + (1.0 - a) * chan2) - mi(first.px, mix_channels(first.channel, second.channel, a));
    report.convexity_in_channel.record(convex, [&] { return alpha_witness(a); });
  }
  return report;
}

// ---- Jensen ---------------------------------------------------------------------

JensenPair jensen_probe(const std::function<double(double)>& f, const Pmf& p, std::span<const double> values) {
  require(values.size() == p.size(), "jensen_probe: one value per symbol required");
  double lhs = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    lhs += p[i] * f(values[i]);
    mean += p[i] * values[i];
  }
  return JensenPair{lhs, f(mean)};
}

// ---- Markov chains --------------------------------------------------------------

JointPmf3 markov_joint(const MarkovChainSpec& spec) {
  const auto& px = spec.px();
  const auto& pyx = spec.py_given_x();
  const auto& pzy = spec.pz_given_y();
  const std::size_t nx = px.size();
  const std::size_t ny = pyx.target_size();
  const std::size_t nz = pzy.target_size();
  std::vector<double> probs(nx * ny * nz);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) probs[(x * ny + y) * nz + z] = px[x] * pyx.at(x, y) * pzy.at(y, z);
  return JointPmf3({px.alphabet(), pyx.target_alphabet(), pzy.target_alphabet()}, std::move(probs));
}

DpiResult dpi_check(const MarkovChainSpec& spec) {
  const JointPmf3 j = markov_joint(spec);
  return DpiResult{
      discrete::mutual_information(j.pair(0, 1)),
      discrete::mutual_information(j.pair(0, 2)),
      discrete::conditional_mutual_information(j, 2),
      discrete::conditional_mutual_information(j, 1),
  };
}

}  // namespace mitk::variational
