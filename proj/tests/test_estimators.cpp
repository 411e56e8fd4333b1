#include <cmath>
#include <cstring>
#include <numbers>

#include <gtest/gtest.h>

#include "mitk/error.hpp"
#include "mitk/estimators.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace mitk::estimators {
namespace {

const GaussianTask kUnit(1, 0.5);
const double kUnitMi = 0.143841;

// Scores from an arbitrary function f(x, y) for d = 1.
template <typename F>
RowMatrix scores_from(const SampleBatch& b, F f) {
  const Eigen::Index n = b.xs.rows();
  RowMatrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = f(b.xs(i, 0), b.ys(j, 0));
  return s;
}

// True log-ratio ln p(y|x) - ln p(y) for the d = 1 task.
double log_ratio(double x, double y) {
  const double r = 0.5;
  const double v = 1.0 - r * r;
  return -0.5 * std::log(v) - (y - r * x) * (y - r * x) / (2.0 * v) + 0.5 * y * y;
}

template <typename F>
testing::MeanSe over_batches(std::size_t count, std::size_t n, const GaussianTask& task, F estimate) {
  std::vector<double> v;
  for (std::size_t k = 0; k < count; ++k)
    v.push_back(estimate(gaussian::sample(task, n, 17, stream_id(StreamKind::kTest, k))));
  return testing::mean_se(v);
}

TEST(EstimatorKindTest, TagsAndDirections) {
  for (auto kind : kAllEstimators) EXPECT_EQ(parse_estimator(tag(kind)), kind);
  EXPECT_FALSE(parse_estimator("mine").has_value());
  EXPECT_EQ(direction(EstimatorKind::kBaUpper), BoundDirection::kUpper);
  EXPECT_EQ(direction(EstimatorKind::kL1Out), BoundDirection::kUpper);
  for (auto kind : {EstimatorKind::kBaLower, EstimatorKind::kDv, EstimatorKind::kTuba, EstimatorKind::kNwj,
                    EstimatorKind::kInfoNce})
    EXPECT_EQ(direction(kind), BoundDirection::kLower);
}

TEST(BaUpperTest, IndependentPairsGiveZeroInExpectation) {
  const GaussianTask task(2, 0.0);
  const auto r = over_batches(200, 128, task, [&](const SampleBatch& b) { return est_ba_upper(task, b); });
  EXPECT_NEAR(r.mean, 0.0, 1e-15);  // the log-ratio vanishes up to rounding
}

TEST(BaUpperTest, UnbiasedWithTrueMarginal) {
  const auto r = over_batches(100, 10000, kUnit, [](const SampleBatch& b) { return est_ba_upper(kUnit, b); });
  EXPECT_NEAR(r.mean, kUnitMi, 3.0 * r.se + 5e-7);
}

TEST(BaUpperTest, WrongMarginalOverestimates) {
  // q = N(0, 2): gap KL(N(0,1) || N(0,2)) = 0.5 (ln 2 + 1/2 - 1).
  const double gap = 0.5 * (std::log(2.0) - 0.5);
  const auto cond = [&](std::span<const double> y, std::span<const double> x) {
    return gaussian::cond_log_density(kUnit, y, x);
  };
  const auto wide = [](std::span<const double> y) { return -0.5 * std::log(4.0 * std::numbers::pi) - y[0] * y[0] / 4.0; };
  const auto r = over_batches(400, 1000, kUnit, [&](const SampleBatch& b) { return est_ba_upper(b, cond, wide); });
  EXPECT_GT(r.mean, kUnitMi + 5.0 * r.se);
  EXPECT_NEAR(r.mean, kUnitMi + gap, 3.0 * r.se);
}

TEST(BaLowerTest, ExactDecoderHitsTrueMi) {
  nn::DecoderParams dec(nn::DecoderArchitecture{1, {}});
  dec.mean.layers()[0].w(0, 0) = 0.5;
  dec.log_var(0) = std::log(0.75);
  const double hx = gaussian::marginal_entropy(kUnit);
  const auto r = over_batches(1000, 1000, kUnit, [&](const SampleBatch& b) { return est_ba_lower(b, dec, hx); });
  EXPECT_NEAR(r.mean, kUnitMi, 3.0 * r.se);
}

TEST(BaLowerTest, MarginalDecoderGivesZero) {
  const nn::DecoderParams dec(nn::DecoderArchitecture{1, {4}});  // zero mean, unit variance
  const double hx = gaussian::marginal_entropy(kUnit);
  const auto r = over_batches(1000, 1000, kUnit, [&](const SampleBatch& b) { return est_ba_lower(b, dec, hx); });
  EXPECT_NEAR(r.mean, 0.0, 3.0 * r.se);
}

TEST(L1OutTest, IndependentPairsNearZero) {
  const GaussianTask task(1, 0.0);
  const auto r = over_batches(500, 128, task, [&](const SampleBatch& b) { return est_l1out(task, b); });
  EXPECT_NEAR(r.mean, 0.0, 3.0 * r.se + 0.01);
}

TEST(L1OutTest, UpperBoundHoldsStatistically) {
  const auto r = over_batches(500, 128, kUnit, [&](const SampleBatch& b) { return est_l1out(kUnit, b); });
  EXPECT_GE(r.mean, kUnitMi - 3.0 * r.se);
}

TEST(L1OutTest, TwoSamplesIsSingleContrast) {
  RowMatrix l(2, 2);
  l << -1.0, -3.0, -2.5, -0.5;
  EXPECT_NEAR(est_l1out(l), 0.5 * ((-1.0 + 3.0) + (-0.5 + 2.5)), 1e-15);
  EXPECT_THROW(est_l1out(RowMatrix::Zero(1, 1)), ContractViolation);
}

TEST(L1OutTest, GenericAndGaussianPathsAgree) {
  const auto b = gaussian::sample(kUnit, 50, 1);
  const auto cond = [&](std::span<const double> y, std::span<const double> x) {
    return gaussian::cond_log_density(kUnit, y, x);
  };
  EXPECT_EQ(est_l1out(b, cond), est_l1out(kUnit, b, Execution::kSerial));
}

TEST(CriticBoundTest, ConstantCriticGivesZero) {
  for (double c : {-3.0, 0.0, 1.0, 7.5}) {
    const RowMatrix s = RowMatrix::Constant(16, 16, c);
    EXPECT_NEAR(est_dv(s), 0.0, 1e-12);
    EXPECT_NEAR(est_infonce(s), 0.0, 1e-12);
    EXPECT_NEAR(est_tuba(s, Eigen::VectorXd::Constant(16, c)), 0.0, 1e-12);
  }
  EXPECT_EQ(est_nwj(RowMatrix::Constant(8, 8, 1.0)), 0.0);
}

TEST(CriticBoundTest, NwjScalarFamilyPeaksAtOne) {
  for (double c : {-1.0, 0.0, 0.5, 1.0, 1.5, 3.0}) {
    const double v = est_nwj(RowMatrix::Constant(8, 8, c));
    EXPECT_NEAR(v, c - std::exp(c - 1.0), 1e-12);
    EXPECT_LE(v, 0.0);
  }
}

TEST(CriticBoundTest, MismatchedBaselineIsStrictlyWorse) {
  const RowMatrix s = RowMatrix::Constant(10, 10, 2.0);
  const double tight = est_tuba(s, Eigen::VectorXd::Constant(10, 2.0));
  for (double la : {0.0, 1.0, 1.9, 2.1, 4.0}) EXPECT_LT(est_tuba(s, Eigen::VectorXd::Constant(10, la)), tight);
}

TEST(CriticBoundTest, TubaWithBaselineEIsNwjBitwise) {
  const auto baseline = nn::BaselineParams::constant(20, 1.0);
  const auto critic = nn::init_critic(nn::CriticArchitecture{nn::CriticForm::kSeparable, 20, {16}, 8}, 0);
  const GaussianTask task(20, 0.4);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto b = gaussian::sample(task, 32, k);
    const double t = est_tuba(critic, baseline, b);
    const double n = est_nwj(critic, b);
    EXPECT_EQ(std::memcmp(&t, &n, sizeof(double)), 0);
  }
}

TEST(CriticBoundTest, OptimalCriticsRecoverTrueMi) {
  const auto dv = over_batches(200, 256, kUnit, [](const SampleBatch& b) { return est_dv(scores_from(b, log_ratio)); });
  EXPECT_NEAR(dv.mean, kUnitMi, 3.0 * dv.se + 0.01);
  const auto nwj = over_batches(200, 256, kUnit, [](const SampleBatch& b) {
    return est_nwj(scores_from(b, [](double x, double y) { return 1.0 + log_ratio(x, y); }));
  });
  EXPECT_NEAR(nwj.mean, kUnitMi, 3.0 * nwj.se);
  const auto nce = over_batches(200, 256, kUnit, [](const SampleBatch& b) { return est_infonce(scores_from(b, log_ratio)); });
  EXPECT_NEAR(nce.mean, kUnitMi, 3.0 * nce.se + 0.01);
}

TEST(CriticBoundTest, InfoNceNeverExceedsLogK) {
  CounterRng rng(0, stream_id(StreamKind::kTest, 0));
  const double cap = std::log(128.0);
  EXPECT_NEAR(cap, 4.852030, 1e-6);
  for (int t = 0; t < 100; ++t) {
    RowMatrix s = testing::random_matrix(rng, 128, 128) * 5.0;
    s.diagonal().array() += 200.0;  // near-deterministic pairing
    EXPECT_LE(est_infonce(s), cap);
  }
}

TEST(CriticBoundTest, InfoNceSaturatesOnNearDeterministicPairs) {
  const GaussianTask task(1, 0.999999);
  const double r = 0.999999;
  const double v = 1.0 - r * r;
  const auto f = [&](double x, double y) { return -0.5 * std::log(v) - (y - r * x) * (y - r * x) / (2.0 * v) + 0.5 * y * y; };
  const auto nce = over_batches(50, 128, task, [&](const SampleBatch& b) { return est_infonce(scores_from(b, f)); });
  EXPECT_LE(nce.mean, std::log(128.0));
  EXPECT_GT(nce.mean, std::log(128.0) - 0.5);
  EXPECT_GT(gaussian::true_mi(task), nce.mean + 1.0);
}

TEST(CriticBoundTest, TangentInequality) {
  CounterRng rng(3, stream_id(StreamKind::kTest, 0));
  for (int t = 0; t < 10000; ++t) {
    const double x = std::exp(rng.uniform(-10.0, 10.0));
    const double a = std::exp(rng.uniform(-10.0, 10.0));
    EXPECT_LE(std::log(x), x / a + std::log(a) - 1.0 + 1e-12 * (1.0 + std::abs(std::log(x))));
    EXPECT_NEAR(std::log(x), x / x + std::log(x) - 1.0, 1e-12 * (1.0 + std::abs(std::log(x))));
  }
}

TEST(CriticBoundTest, UbaDiagnosticIsShiftInvariant) {
  CounterRng rng(4, stream_id(StreamKind::kTest, 0));
  const RowMatrix s = testing::random_matrix(rng, 12, 12);
  EXPECT_NEAR(est_uba_diagnostic(s), est_uba_diagnostic(RowMatrix(s.array() + 40.0)), 1e-10);
  EXPECT_NEAR(est_uba_diagnostic(RowMatrix::Constant(12, 12, 3.0)), 0.0, 1e-12);
}

// d value / d S against central differences on the score matrix.
template <typename F>
double score_grad_error(const RowMatrix& s0, const RowMatrix& analytic, F value) {
  RowMatrix s = s0;
  double worst = 0.0;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const double saved = s(i, j);
      s(i, j) = saved + h;
      const double up = value(s);
      s(i, j) = saved - h;
      const double down = value(s);
      s(i, j) = saved;
      worst = std::max(worst, testing::rel_error(analytic(i, j), (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

TEST(BoundGradientTest, MatchesFiniteDifferences) {
  CounterRng rng(5, stream_id(StreamKind::kTest, 0));
  for (int t = 0; t < 10; ++t) {
    const RowMatrix s = testing::random_matrix(rng, 6, 6);
    Eigen::VectorXd la(6);
    for (Eigen::Index k = 0; k < 6; ++k) la(k) = rng.normal();
    const auto dv = dv_gradient(s);
    EXPECT_EQ(dv.value, est_dv(s));
    EXPECT_LT(score_grad_error(s, dv.d_scores, [](const RowMatrix& m) { return est_dv(m); }), 1e-6);
    const auto nwj = nwj_gradient(s);
    EXPECT_EQ(nwj.value, est_nwj(s));
    EXPECT_LT(score_grad_error(s, nwj.d_scores, [](const RowMatrix& m) { return est_nwj(m); }), 1e-6);
    const auto nce = infonce_gradient(s);
    EXPECT_EQ(nce.value, est_infonce(s));
    EXPECT_LT(score_grad_error(s, nce.d_scores, [](const RowMatrix& m) { return est_infonce(m); }), 1e-6);
    const auto tuba = tuba_gradient(s, la);
    EXPECT_EQ(tuba.value, est_tuba(s, la));
    EXPECT_LT(score_grad_error(s, tuba.d_scores, [&](const RowMatrix& m) { return est_tuba(m, la); }), 1e-6);
    for (Eigen::Index k = 0; k < 6; ++k) {
      Eigen::VectorXd up = la, down = la;
      up(k) += 1e-5;
      down(k) -= 1e-5;
      EXPECT_LT(testing::rel_error(tuba.d_log_a(k), (est_tuba(s, up) - est_tuba(s, down)) / 2e-5), 1e-6);
    }
  }
}

TEST(BoundGradientTest, ParallelMatchesSerial) {
  CounterRng rng(6, stream_id(StreamKind::kTest, 0));
  const RowMatrix s = testing::random_matrix(rng, 128, 128) * 3.0;
  EXPECT_EQ(est_dv(s, Execution::kSerial), est_dv(s, Execution::kParallel));
  EXPECT_EQ(est_nwj(s, Execution::kSerial), est_nwj(s, Execution::kParallel));
  EXPECT_EQ(est_infonce(s, Execution::kSerial), est_infonce(s, Execution::kParallel));
  EXPECT_EQ(dv_gradient(s, Execution::kSerial).d_scores, dv_gradient(s, Execution::kParallel).d_scores);
}

}  // namespace
}  // namespace mitk::estimators
