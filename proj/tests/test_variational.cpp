#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "mitk/error.hpp"
#include "mitk/probes.hpp"
#include "mitk/random_tables.hpp"
#include "mitk/variational.hpp"

namespace mitk::variational {
namespace {

using discrete::kl_divergence;
using discrete::mutual_information;

const JointPmf2 kCorrelated(2, 2, {0.4, 0.1, 0.1, 0.4});
const JointPmf2 kDiagonal(2, 2, {0.5, 0.0, 0.0, 0.5});
const JointPmf2 kIndependent = JointPmf2::product(Pmf({0.3, 0.7}), Pmf({0.6, 0.4}));

TEST(GoldenDecompositionTest, TrueMarginalRemovesPenalty) {
  const auto terms = golden_decomposition(kCorrelated, Pmf({0.5, 0.5}));
  EXPECT_EQ(terms.penalty_term.value(), 0.0);
  EXPECT_NEAR(terms.conditional_term.value(), mutual_information(kCorrelated), 1e-15);

  const auto zero = golden_decomposition(kIndependent, kIndependent.row_marginal());
  EXPECT_NEAR(zero.conditional_term.value(), 0.0, 1e-15);
  EXPECT_EQ(zero.penalty_term.value(), 0.0);
}

TEST(GoldenDecompositionTest, DifferenceIsMutualInformation) {
  const Pmf q({0.7, 0.3});
  const auto rows = golden_decomposition(kCorrelated, q, Axis::kRows);
  EXPECT_NEAR(rows.difference(), 0.192745, 1e-6);
  // Oracle: D(P_{X|Y} || Q) = sum_y P(y) KL(P_{X|Y=y} || Q); the rows are (0.8, 0.2) and (0.2, 0.8).
  const double conditional = 0.5 * kl_divergence(Pmf({0.8, 0.2}), q).value() + 0.5 * kl_divergence(Pmf({0.2, 0.8}), q).value();
  EXPECT_NEAR(rows.conditional_term.value(), conditional, 1e-15);
  EXPECT_NEAR(rows.penalty_term.value(), kl_divergence(Pmf({0.5, 0.5}), q).value(), 1e-15);

  const auto cols = golden_decomposition(kCorrelated, q, Axis::kCols);
  EXPECT_NEAR(cols.difference(), mutual_information(kCorrelated), 1e-12);
}

TEST(GoldenDecompositionTest, SupportViolationIsInfinite) {
  const auto terms = golden_decomposition(kCorrelated, Pmf({1.0, 0.0}));
  EXPECT_TRUE(terms.conditional_term.is_infinite());
  EXPECT_TRUE(terms.penalty_term.is_infinite());
}

TEST(ProductDistanceTest, ConvergesToMarginals) {
  const auto fit = product_distance_minimize(kCorrelated, 2);
  EXPECT_NEAR(fit.value, 0.192745, 1e-6);
  EXPECT_NEAR(fit.qx[0], 0.5, 1e-15);
  EXPECT_NEAR(fit.qy[1], 0.5, 1e-15);
  EXPECT_NEAR(product_distance_minimize(kDiagonal, 1).value, std::log(2.0), 1e-15);
  const auto indep = product_distance_minimize(kIndependent, 1);
  EXPECT_NEAR(indep.value, 0.0, 1e-15);
  EXPECT_EQ(indep.qx, kIndependent.row_marginal());
  EXPECT_THROW(product_distance_minimize(kCorrelated, 0), ContractViolation);
}

TEST(ProductDistanceTest, NeverBelowMutualInformation) {
  CounterRng rng(21, stream_id(StreamKind::kTest, 21));
  for (int t = 0; t < 200; ++t) {
    const JointPmf2 j = discrete::random_joint2(rng, 2 + rng.below(4), 2 + rng.below(4));
    const double mi = mutual_information(j);
    for (double v : product_distance_minimize(j, 3).history) EXPECT_GE(v, mi - 1e-10);
  }
}

TEST(DvTest, Values) {
  const Pmf p({0.75, 0.25});
  const Pmf q({0.5, 0.5});
  EXPECT_NEAR(dv_value(p, q, CriticVector::constant(2, 3.7)), 0.0, 1e-15);
  EXPECT_NEAR(dv_value(p, q, CriticVector({std::log(1.5), std::log(0.5)})), kl_divergence(p, q).value(), 1e-15);
  const double direct = 0.75 - std::log(0.5 * std::exp(1.0) + 0.5);
  EXPECT_NEAR(dv_value(p, q, CriticVector({1.0, 0.0})), direct, 1e-15);
  EXPECT_NEAR(dv_value(p, q, CriticVector({1.0, 0.0})), 0.129885, 1e-6);
  EXPECT_LE(dv_value(p, q, CriticVector({1.0, 0.0})), kl_divergence(p, q).value());
  EXPECT_THROW(dv_value(p, Pmf({0.2, 0.3, 0.5}), CriticVector({1.0, 0.0})), ContractViolation);
  EXPECT_THROW(CriticVector({1.0, std::nan("")}), ContractViolation);
}

TEST(DvTest, WeakDuality) {
  CounterRng rng(22, stream_id(StreamKind::kTest, 22));
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 2 + rng.below(8);
    const Pmf p = discrete::random_pmf(rng, n);
    const Pmf q = discrete::random_pmf(rng, n);
    std::vector<double> g(n);
    for (auto& v : g) v = 4.0 * rng.normal();
    EXPECT_LE(dv_value(p, q, CriticVector(g)), kl_divergence(p, q).value() + 1e-12);
  }
}

TEST(DvTest, SupremumMatchesKl) {
  const Pmf p({0.75, 0.25});
  const Pmf q({0.5, 0.5});
  EXPECT_NEAR(dv_supremum(p, p).value, 0.0, 1e-12);
  EXPECT_NEAR(dv_supremum(p, q).value, 0.130812, 1e-6);
  EXPECT_NEAR(dv_supremum(p, q).value, kl_divergence(p, q).value(), 1e-6);

  CounterRng rng(23, stream_id(StreamKind::kTest, 23));
  for (std::size_t n : {8u, 16u, 16u, 16u}) {
    const Pmf a = discrete::random_pmf(rng, n);
    const Pmf b = discrete::random_pmf(rng, n);
    const auto opt = dv_supremum(a, b);
    EXPECT_NEAR(opt.value, kl_divergence(a, b).value(), 1e-6) << "n=" << n;
    EXPECT_LT(opt.steps_taken, kDvDefaultSteps);
  }
  EXPECT_THROW(dv_supremum(Pmf({1.0, 0.0}), q), ContractViolation);
}

TEST(PartitionTest, EnumerationCountsMatchBellAndStirling) {
  // Bell numbers 1, 2, 5, 15, 52, 203, 877, 4140.
  const std::size_t bell[] = {1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t n = 1; n <= 8; ++n) {
    std::set<std::vector<std::size_t>> seen;
    for_each_partition(n, n, [&](std::span<const std::size_t> rgs) { seen.emplace(rgs.begin(), rgs.end()); });
    EXPECT_EQ(seen.size(), bell[n - 1]);
  }
  // Partitions of 5 into at most 2 blocks: S(5,1) + S(5,2) = 1 + 15.
  std::size_t count = 0;
  for_each_partition(5, 2, [&](auto) { ++count; });
  EXPECT_EQ(count, 16u);
}

TEST(PartitionTest, Validation) {
  EXPECT_THROW(Partition(3, {{0, 1}, {1, 2}}), ContractViolation);
  EXPECT_THROW(Partition(3, {{0, 1}}), ContractViolation);
  const std::size_t rgs[] = {0, 1, 0, 2};
  const Partition p = Partition::from_growth_string(rgs);
  EXPECT_EQ(p.blocks(), (std::vector<std::vector<std::size_t>>{{0, 2}, {1}, {3}}));
  EXPECT_EQ(p.labels(discrete::index_alphabet(4, "s"))[0], (std::vector<std::string>{"s0", "s2"}));
}

TEST(GypTest, Supremum) {
  const Pmf p({0.75, 0.25});
  const Pmf q({0.5, 0.5});
  const auto two = gyp_supremum(p, q, 2);
  EXPECT_EQ(two.value, kl_divergence(p, q));
  EXPECT_EQ(two.best, Partition::singletons(2));
  EXPECT_EQ(gyp_supremum(p, q, 1).value.value(), 0.0);
  EXPECT_EQ(gyp_supremum(p, p, 2).value.value(), 0.0);
  EXPECT_THROW(gyp_supremum(discrete::random_pmf(*std::make_unique<CounterRng>(1, 1), 9),
                            Pmf::uniform(discrete::index_alphabet(9)), 2),
               ContractViolation);
}

TEST(GypTest, MonotoneAndExactAtFinest) {
  CounterRng rng(24, stream_id(StreamKind::kTest, 24));
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.below(7);
    const Pmf p = discrete::random_pmf(rng, n);
    const Pmf q = discrete::random_pmf(rng, n);
    double previous = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double v = gyp_supremum(p, q, k).value.value();
      EXPECT_GE(v, previous);
      previous = v;
    }
    EXPECT_EQ(previous, kl_divergence(p, q).value());
  }
}

TEST(GypTest, MutualInformation) {
  EXPECT_NEAR(gyp_mi_supremum(kIndependent, 2), 0.0, 1e-15);
  EXPECT_NEAR(gyp_mi_supremum(kCorrelated, 2), 0.192745, 1e-6);
  EXPECT_EQ(gyp_mi_supremum(kCorrelated, 2), mutual_information(kCorrelated));
  EXPECT_EQ(gyp_mi_supremum(kCorrelated, 1), 0.0);
  EXPECT_THROW(gyp_mi_supremum(JointPmf2(6, 1, std::vector<double>(6, 1.0 / 6)), 2), ContractViolation);
}

TEST(ConvexityTest, KlConvexity) {
  const PmfPair a{Pmf({0.6, 0.4}), Pmf({0.3, 0.7})};
  const PmfPair b{Pmf({0.1, 0.9}), Pmf({0.5, 0.5})};
  const double endpoints[] = {0.0, 1.0};
  EXPECT_EQ(kl_convexity_probe(a, b, endpoints).worst_slack, 0.0);
  EXPECT_NEAR(kl_convexity_probe(a, a, fixed_alpha_grid()).worst_slack, 0.0, 1e-15);
  const auto report = kl_convexity_probe(a, b, fixed_alpha_grid());
  EXPECT_EQ(report.checks, 11u);
  EXPECT_GE(report.worst_slack, -1e-12);
}

TEST(ConvexityTest, MiConcavityConvexity) {
  CounterRng rng(25, stream_id(StreamKind::kTest, 25));
  const double endpoints[] = {0.0, 1.0};
  for (int t = 0; t < 100; ++t) {
    const MiFactors a{discrete::random_pmf(rng, 3), discrete::random_channel(rng, 3, 4)};
    const MiFactors b{discrete::random_pmf(rng, 3), discrete::random_channel(rng, 3, 4)};
    const auto report = mi_concavity_convexity_probe(a, b, fixed_alpha_grid());
    EXPECT_GE(report.concavity_in_input.worst_slack, -1e-12);
    EXPECT_GE(report.convexity_in_channel.worst_slack, -1e-12);
    const auto same = mi_concavity_convexity_probe(a, a, fixed_alpha_grid());
    EXPECT_NEAR(same.concavity_in_input.worst_slack, 0.0, 1e-14);
    const auto ends = mi_concavity_convexity_probe(a, b, endpoints);
    EXPECT_NEAR(ends.convexity_in_channel.worst_slack, 0.0, 1e-15);
  }
}

TEST(JensenTest, Cases) {
  const Pmf p({0.3, 0.7});
  const double v[] = {1.0, 4.0};
  const auto affine = jensen_probe([](double t) { return 2.0 * t + 1.0; }, p, v);
  EXPECT_NEAR(affine.lhs, affine.rhs, 1e-15);
  const auto square = jensen_probe([](double t) { return t * t; }, p, v);
  EXPECT_NEAR(square.lhs, 0.3 * 1.0 + 0.7 * 16.0, 1e-15);
  EXPECT_NEAR(square.rhs, std::pow(0.3 + 2.8, 2), 1e-14);
  EXPECT_GE(square.lhs, square.rhs);
}

TEST(MarkovTest, JointFactorsAndIsConditionallyIndependent) {
  const Pmf px({0.2, 0.8});
  const discrete::CondPmf pyx(2, 2, {0.9, 0.1, 0.3, 0.7});
  const discrete::CondPmf pzy(2, 2, {0.6, 0.4, 0.15, 0.85});
  const MarkovChainSpec spec(px, pyx, pzy);
  const auto j = markov_joint(spec);
  const std::size_t idx[] = {1, 0, 1};
  EXPECT_NEAR(j.at(idx), 0.8 * 0.3 * 0.4, 1e-17);
  EXPECT_LE(discrete::conditional_mutual_information(j, 1), 1e-12);

  const discrete::CondPmf identity(2, 2, {1.0, 0.0, 0.0, 1.0});
  const auto copy = dpi_check(MarkovChainSpec(px, pyx, identity));
  EXPECT_NEAR(copy.ixz, copy.ixy, 1e-15);
  const auto noise = dpi_check(MarkovChainSpec(px, pyx, discrete::CondPmf(2, 2, {0.5, 0.5, 0.5, 0.5})));
  EXPECT_NEAR(noise.ixz, 0.0, 1e-15);
  EXPECT_GE(noise.ixy, noise.ixz);
  EXPECT_THROW(MarkovChainSpec(px, discrete::CondPmf(3, 2, {1, 0, 1, 0, 1, 0}), pzy), ContractViolation);
}

TEST(ProbeSuiteTest, PassesAndIsDeterministic) {
  probes::ProbeOptions options;
  options.trials = 50;
  options.seed = 3;
  const auto parallel = probes::run_probe_suite(options);
  options.execution = probes::Execution::kSerial;
  const auto serial = probes::run_probe_suite(options);
  ASSERT_EQ(parallel.size(), serial.size());
  for (std::size_t k = 0; k < parallel.size(); ++k) {
    EXPECT_TRUE(parallel[k].passed()) << probes::format_probe_line(parallel[k]);
    EXPECT_EQ(probes::format_probe_line(parallel[k]), probes::format_probe_line(serial[k]));
  }
}

TEST(ProbeSuiteTest, CorruptedOracleFails) {
  probes::ProbeOptions options;
  options.trials = 20;
  options.kl = probes::corrupted_kl_oracle();
  std::size_t failed = 0;
  for (const auto& line : probes::run_probe_suite(options)) failed += line.passed() ? 0 : 1;
  EXPECT_GE(failed, 3u);
}

TEST(ProbeSuiteTest, ZeroTrialsIsVacuous) {
  probes::ProbeOptions options;
  options.trials = 0;
  for (const auto& line : probes::run_probe_suite(options)) {
    EXPECT_TRUE(line.passed());
    EXPECT_EQ(line.checks, 0u);
  }
}

}  // namespace
}  // namespace mitk::variational
