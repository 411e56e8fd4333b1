#include "mitk/probes.hpp"

#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>

#include "mitk/error.hpp"
#include "mitk/random_tables.hpp"
#include "mitk/rng.hpp"
#include "mitk/variational.hpp"

namespace mitk::probes {
namespace {

using discrete::Axis;
using discrete::JointPmf2;
using discrete::JointPmfN;
using discrete::Pmf;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::size_t size_between(CounterRng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

// A random Pmf on n symbols with about a third of the cells zeroed.
Pmf sparse_pmf(CounterRng& rng, std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& v : w) {
    v = rng.uniform() < 0.33 ? 0.0 : rng.exponential();
    total += v;
  }
  if (total == 0.0) {
    w[rng.below(n)] = 1.0;
    total = 1.0;
  }
  for (auto& v : w) v /= total;
  return Pmf(std::move(w));
}

struct TrialContext {
  std::size_t trial;
  std::uint64_t seed;
  const ProbeOptions& options;
  [[nodiscard]] std::string tag(std::string_view detail = {}) const {
    std::string s = "seed=" + std::to_string(seed) + " trial=" + std::to_string(trial);
    if (!detail.empty()) s += " " + std::string(detail);
    return s;
  }
};

using TrialFn = std::function<void(CounterRng&, SlackTracker&, const TrialContext&)>;

struct ProbeDef {
  std::string id;
  double tolerance;
  TrialFn trial;
};

SlackTracker run_trials(std::size_t probe_index, const ProbeOptions& options, const TrialFn& trial) {
  const std::size_t n = options.trials;
  std::vector<SlackTracker> per_trial(n);
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t t) {
    try {
      CounterRng rng(options.seed, stream_id(StreamKind::kProbe, (std::uint64_t{probe_index} << 32) | t));
      trial(rng, per_trial[t], TrialContext{t, options.seed, options});
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (options.execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(n); ++t) body(static_cast<std::size_t>(t));
  } else {
    for (std::size_t t = 0; t < n; ++t) body(t);
  }
  SlackTracker merged;
  for (std::size_t t = 0; t < n; ++t) {
    if (errors[t]) std::rethrow_exception(errors[t]);
    merged.merge(per_trial[t]);
  }
  return merged;
}

// ---- probe bodies -------------------------------------------------------------

void entropy_chain_rule(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const JointPmf2 j = discrete::random_joint2(rng, size_between(rng, 2, 5), size_between(rng, 2, 5));
  const double hxy = discrete::joint_entropy(j);
  const double hx = discrete::entropy(j.row_marginal());
  const double hy = discrete::entropy(j.col_marginal());
  const double hy_x = discrete::conditional_entropy(j, Axis::kRows);
  s.check(-std::abs(hxy - (hx + hy_x)), 1e-12, [&] { return c.tag("H(X,Y)=H(X)+H(Y|X)"); });
  s.check(hx + hy - hxy, 1e-12, [&] { return c.tag("H(X,Y)<=H(X)+H(Y)"); });
  s.check(hy - hy_x, 1e-12, [&] { return c.tag("H(Y|X)<=H(Y)"); });

  const JointPmfN t = discrete::random_joint(rng, {size_between(rng, 2, 3), size_between(rng, 2, 3), size_between(rng, 2, 3)});
  const std::size_t xy[] = {0, 1}, x[] = {0}, y[] = {1}, z[] = {2}, xz[] = {0, 2};
  const double lhs = discrete::conditional_entropy(t, xy, z);
  const double rhs = discrete::conditional_entropy(t, x, z) + discrete::conditional_entropy(t, y, xz);
  s.check(-std::abs(lhs - rhs), 1e-10, [&] { return c.tag("H(X,Y|Z)=H(X|Z)+H(Y|X,Z)"); });
}

void mi_entropy_identities(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const JointPmf2 j = discrete::random_joint2(rng, size_between(rng, 2, 6), size_between(rng, 2, 6));
  const double direct = discrete::mutual_information(j);
  const double kl_form = discrete::mutual_information_kl_form(j);
  const double entropy_form = discrete::mutual_information_entropy_form(j);
  s.check(-std::abs(direct - kl_form), 1e-12, [&] { return c.tag("direct vs KL form"); });
  s.check(-std::abs(direct - entropy_form), 1e-12, [&] { return c.tag("direct vs entropy form"); });
  s.check(-std::abs(direct - discrete::mutual_information(j.transposed())), 0.0, [&] { return c.tag("symmetry"); });
  s.check(direct, 0.0, [&] { return c.tag("I>=0"); });

  const Pmf p = discrete::random_pmf(rng, size_between(rng, 2, 6));
  std::vector<double> diag(p.size() * p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) diag[i * p.size() + i] = p[i];
  const JointPmf2 copy(p.size(), p.size(), std::move(diag));
  s.check(-std::abs(discrete::mutual_information(copy) - discrete::entropy(p)), 1e-12, [&] { return c.tag("I(X;X)=H(X)"); });
}

void mi_chain_rule(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const std::size_t inputs = size_between(rng, 1, discrete::kMaxChainInputs);
  std::vector<std::size_t> shape;
  for (std::size_t i = 0; i <= inputs; ++i) shape.push_back(size_between(rng, 2, 3));
  const JointPmfN j = discrete::random_joint(rng, shape);
  double sum = 0.0;
  for (double term : discrete::mi_chain_rule_terms(j)) {
    sum += term;
    s.check(term, 1e-12, [&] { return c.tag("term>=0"); });
  }
  s.check(-std::abs(sum - discrete::joint_input_mutual_information(j)), 1e-10,
          [&] { return c.tag("inputs=" + std::to_string(inputs)); });

  const JointPmfN t = discrete::random_joint(rng, {size_between(rng, 2, 3), size_between(rng, 2, 3), size_between(rng, 2, 3)});
  const std::size_t axis = rng.below(3);
  const double entropy_form = discrete::conditional_mutual_information(t, axis);
  const double direct = discrete::conditional_mutual_information_direct(t, axis);
  s.check(-std::abs(entropy_form - direct), 1e-12, [&] { return c.tag("conditional MI forms, axis=" + std::to_string(axis)); });
}

void kl_convexity(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const std::size_t n = size_between(rng, 2, 6);
  const variational::PmfPair first{discrete::random_pmf(rng, n), discrete::random_pmf(rng, n)};
  const variational::PmfPair second{discrete::random_pmf(rng, n), discrete::random_pmf(rng, n)};
  const auto report = variational::kl_convexity_probe(first, second, variational::alpha_grid(rng));
  s.check(report.worst_slack, 1e-12, [&] { return c.tag(report.witness); });
}

void entropy_concavity(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const std::size_t n = size_between(rng, 2, 8);
  const Pmf p = discrete::random_pmf(rng, n);
  const auto report = variational::entropy_concavity_probe(p, discrete::random_pmf(rng, n), variational::alpha_grid(rng));
  s.check(report.worst_slack, 1e-12, [&] { return c.tag(report.witness); });

  // Continuity: mixing toward a random direction at total-variation size eps
  // must move H by strictly less as eps shrinks.
  const Pmf r = discrete::random_pmf(rng, n);
  const double tv = discrete::total_variation(p, r);
  if (tv == 0.0) return;
  const double h = discrete::entropy(p);
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double t = std::min(1.0, eps / tv);
    std::vector<double> mixed(n);
    for (std::size_t i = 0; i < n; ++i) mixed[i] = (1.0 - t) * p[i] + t * r[i];
    const double delta = std::abs(discrete::entropy(Pmf(std::move(mixed))) - h);
    s.check_strict(previous - delta, [&] { return c.tag("continuity eps=" + fmt(eps)); });
    previous = delta;
  }
}

void mi_concavity_convexity(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const std::size_t nx = size_between(rng, 2, 5);
  const std::size_t ny = size_between(rng, 2, 5);
  const variational::MiFactors first{discrete::random_pmf(rng, nx), discrete::random_channel(rng, nx, ny)};
  const variational::MiFactors second{discrete::random_pmf(rng, nx), discrete::random_channel(rng, nx, ny)};
  const auto report = variational::mi_concavity_convexity_probe(first, second, variational::alpha_grid(rng));
  s.check(report.concavity_in_input.worst_slack, 1e-12, [&] { return c.tag("concave in P_X " + report.concavity_in_input.witness); });
  s.check(report.convexity_in_channel.worst_slack, 1e-12,
          [&] { return c.tag("convex in P_{Y|X} " + report.convexity_in_channel.witness); });
}

void jensen(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const std::size_t n = size_between(rng, 2, 8);
  const Pmf p = discrete::random_pmf(rng, n);
  std::vector<double> values(n);
  for (auto& v : values) v = rng.exponential();

  const auto square = variational::jensen_probe([](double t) { return t * t; }, p, values);
  s.check(square.lhs - square.rhs, 1e-12, [&] { return c.tag("f=t^2"); });
  const auto tlnt = variational::jensen_probe([](double t) { return t * std::log(t); }, p, values);
  s.check(tlnt.lhs - tlnt.rhs, 1e-12, [&] { return c.tag("f=t ln t"); });
  const auto expo = variational::jensen_probe([](double t) { return std::exp(t); }, p, values);
  s.check(expo.lhs - expo.rhs, 1e-12 * std::max(1.0, expo.rhs), [&] { return c.tag("f=exp"); });
  const auto affine = variational::jensen_probe([](double t) { return 3.0 * t - 2.0; }, p, values);
  s.check(-std::abs(affine.lhs - affine.rhs), 1e-12 * std::max(1.0, std::abs(affine.rhs)), [&] { return c.tag("f affine"); });
}

void divergence_inequality(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const auto& kl = c.options.kl;
  const std::size_t n = size_between(rng, 2, 8);
  const Pmf p = sparse_pmf(rng, n);
  const Pmf q = sparse_pmf(rng, n);
  const ExtReal d = kl(p, q);
  s.check(d.value(), 0.0, [&] { return c.tag("KL>=0"); });
  if (p != q) s.check_strict(d.value(), [&] { return c.tag("KL>0 when P!=Q"); });
  s.check(-std::abs(kl(p, p).value()), 0.0, [&] { return c.tag("KL(P||P)=0"); });

  const Pmf full = discrete::random_pmf(rng, n);
  s.check(discrete::jensen_shannon(p, full).value(), 0.0, [&] { return c.tag("JS>=0"); });
  s.check(discrete::total_variation(p, full), 0.0, [&] { return c.tag("TV>=0"); });
  s.check(discrete::mutual_information(discrete::random_joint2(rng, n, 3)), 0.0, [&] { return c.tag("I>=0"); });
}

void data_processing(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  // Ten binary chains per trial, then one with alphabets up to 4.
  for (int k = 0; k < 11; ++k) {
    const bool binary = k < 10;
    const std::size_t nx = binary ? 2 : size_between(rng, 2, 4);
    const std::size_t ny = binary ? 2 : size_between(rng, 2, 4);
    const std::size_t nz = binary ? 2 : size_between(rng, 2, 4);
    const variational::MarkovChainSpec spec(discrete::random_pmf(rng, nx), discrete::random_channel(rng, nx, ny),
                                            discrete::random_channel(rng, ny, nz));
    const auto r = variational::dpi_check(spec);
    auto where = [&] { return c.tag("chain=" + std::to_string(k)); };
    s.check(r.ixy - r.ixz, 1e-12, where);
    s.check(-r.ixz_given_y, 1e-12, where);
    s.check(r.ixy - r.ixy_given_z, 1e-12, where);
  }
}

void golden_identity(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const JointPmf2 j = discrete::random_joint2(rng, size_between(rng, 2, 6), size_between(rng, 2, 6));
  const double mi = discrete::mutual_information(j);
  for (Axis axis : {Axis::kRows, Axis::kCols}) {
    const std::string side = axis == Axis::kRows ? "aux over X" : "aux over Y";
    const Pmf marginal = j.marginal(axis);
    const Pmf q = discrete::random_pmf(rng, marginal.size());
    const auto terms = variational::golden_decomposition(j, Pmf(marginal.alphabet(), {q.probs().begin(), q.probs().end()}), axis);
    s.check(-std::abs(terms.difference() - mi), 1e-10, [&] { return c.tag(side); });
    const auto tight = variational::golden_decomposition(j, marginal, axis);
    s.check(-std::abs(tight.penalty_term.value()), 0.0, [&] { return c.tag(side + " penalty at Q=P"); });
    s.check(-std::abs(tight.conditional_term.value() - mi), 1e-10, [&] { return c.tag(side + " Q=P"); });
  }
}

void product_distance(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const JointPmf2 j = discrete::random_joint2(rng, size_between(rng, 2, 6), size_between(rng, 2, 6));
  const double mi = discrete::mutual_information(j);
  const auto fit = variational::product_distance_minimize(j, 3);
  for (double v : fit.history) s.check(v - mi, 1e-10, [&] { return c.tag("history above I"); });
  s.check(-std::abs(fit.value - mi), 1e-8, [&] { return c.tag("value"); });
  const Pmf px = j.row_marginal();
  const Pmf py = j.col_marginal();
  for (std::size_t i = 0; i < px.size(); ++i) s.check(-std::abs(fit.qx[i] - px[i]), 1e-8, [&] { return c.tag("Q_X"); });
  for (std::size_t i = 0; i < py.size(); ++i) s.check(-std::abs(fit.qy[i] - py[i]), 1e-8, [&] { return c.tag("Q_Y"); });
}

void donsker_varadhan(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const std::size_t n = size_between(rng, 2, 16);
  const Pmf p = discrete::random_pmf(rng, n);
  const Pmf q = discrete::random_pmf(rng, n);
  const double kl = c.options.kl(p, q).value();
  const auto opt = variational::dv_supremum(p, q);
  s.check(-std::abs(opt.value - kl), 1e-6, [&] { return c.tag("supremum, n=" + std::to_string(n)); });
  for (int k = 0; k < 10; ++k) {
    std::vector<double> g(n);
    for (auto& v : g) v = 3.0 * rng.normal();
    const double value = variational::dv_value(p, q, variational::CriticVector(std::move(g)));
    s.check(kl - value, 1e-12, [&] { return c.tag("weak duality"); });
  }
}

void gelfand_yaglom_perez(CounterRng& rng, SlackTracker& s, const TrialContext& c) {
  const std::size_t n = size_between(rng, 2, variational::kMaxGypAlphabet);
  const Pmf p = discrete::random_pmf(rng, n);
  const Pmf q = discrete::random_pmf(rng, n);
  const double kl = c.options.kl(p, q).value();
  double previous = 0.0;
  for (std::size_t blocks = 1; blocks <= n; ++blocks) {
    const auto sup = variational::gyp_supremum(p, q, blocks);
    s.check(sup.value.value() - previous, 0.0, [&] { return c.tag("monotone in max_blocks"); });
    previous = sup.value.value();
    if (blocks == n) {
      s.check(-std::abs(sup.value.value() - kl), 0.0, [&] { return c.tag("finest equals KL, n=" + std::to_string(n)); });
      s.check(sup.best == variational::Partition::singletons(n) ? 0.0 : -1.0, 0.0,
              [&] { return c.tag("attained by singletons"); });
    }
  }
  const JointPmf2 j = discrete::random_joint2(rng, size_between(rng, 2, 4), size_between(rng, 2, 4));
  const double mi_sup = variational::gyp_mi_supremum(j, std::max(j.rows(), j.cols()));
  s.check(-std::abs(mi_sup - discrete::mutual_information(j)), 1e-12, [&] { return c.tag("rectangles equal I"); });
}

const std::vector<ProbeDef>& registry() {
  static const std::vector<ProbeDef> defs = {
      {"entropy-chain-rule", 1e-12, entropy_chain_rule},
      {"mi-entropy-identities", 1e-12, mi_entropy_identities},
      {"mi-chain-rule", 1e-10, mi_chain_rule},
      {"kl-convexity", 1e-12, kl_convexity},
      {"entropy-concavity", 1e-12, entropy_concavity},
      {"mi-concavity-convexity", 1e-12, mi_concavity_convexity},
      {"jensen", 1e-12, jensen},
      {"divergence-inequality", 0.0, divergence_inequality},
      {"data-processing", 1e-12, data_processing},
      {"golden-identity", 1e-10, golden_identity},
      {"product-distance", 1e-8, product_distance},
      {"donsker-varadhan", 1e-6, donsker_varadhan},
      {"gelfand-yaglom-perez", 0.0, gelfand_yaglom_perez},
  };
  return defs;
}

}  // namespace

void SlackTracker::merge(const SlackTracker& other) {
  checks_ += other.checks_;
  violations_ += other.violations_;
  if (other.checks_ == 0) return;
  const bool take = (other.witness_bad_ && !witness_bad_) ||
                    (other.witness_bad_ == witness_bad_ && other.worst_slack_ < worst_slack_);
  if (take) {
    worst_slack_ = other.worst_slack_;
    witness_ = other.witness_;
    witness_bad_ = other.witness_bad_;
  }
}

std::vector<std::string> probe_ids() {
  std::vector<std::string> ids;
  for (const auto& def : registry()) ids.push_back(def.id);
  return ids;
}

ProbeLine run_probe(std::string_view id, const ProbeOptions& options) {
  const auto& defs = registry();
  for (std::size_t k = 0; k < defs.size(); ++k) {
    if (defs[k].id != id) continue;
    const SlackTracker t = run_trials(k, options, defs[k].trial);
    return ProbeLine{defs[k].id, options.trials, t.checks(), t.violations(), t.worst_slack(), defs[k].tolerance, t.witness()};
  }
  throw ContractViolation("run_probe: unknown probe '" + std::string(id) + "'");
}

std::vector<ProbeLine> run_probe_suite(const ProbeOptions& options) {
  std::vector<ProbeLine> lines;
  for (const auto& id : probe_ids()) lines.push_back(run_probe(id, options));
  return lines;
}

KlOracle corrupted_kl_oracle() {
  return [](const Pmf& p, const Pmf& q) { return discrete::kl_divergence(p, q) + ExtReal(1e-3); };
}

std::string format_probe_line(const ProbeLine& line) {
  std::ostringstream os;
  os << std::left << std::setw(24) << line.id << " trials=" << line.trials << " checks=" << line.checks
     << " worst_slack=" << std::setprecision(3) << std::scientific << line.worst_slack << " tol=" << line.tolerance
     << " " << (line.passed() ? "PASS" : "FAIL");
  if (!line.passed()) os << " violations=" << line.violations << " witness: " << line.witness;
  return os.str();
}

}  // namespace mitk::probes
