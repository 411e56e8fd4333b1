#include <cmath>

#include <gtest/gtest.h>

#include "mitk/adam.hpp"
#include "mitk/critic.hpp"
#include "mitk/decoder.hpp"
#include "mitk/error.hpp"
#include "support/gradcheck.hpp"

namespace mitk::nn {
namespace {

const gaussian::GaussianTask kTask(3, 0.5);

CriticArchitecture small(CriticForm form) {
  CriticArchitecture a;
  a.form = form;
  a.dim = 3;
  a.widths = {8, 6};
  a.embed = 4;
  return a;
}

TEST(MlpTest, RejectsZeroWidths) {
  EXPECT_THROW(Mlp(Architecture{0, {4}, 1}), ContractViolation);
  EXPECT_THROW(Mlp(Architecture{3, {4, 0}, 1}), ContractViolation);
  CriticArchitecture bad = small(CriticForm::kSeparable);
  bad.embed = 0;
  EXPECT_THROW(init_critic(bad, 0), ContractViolation);
}

TEST(MlpTest, ForwardMatchesHandComputation) {
  Mlp net(Architecture{2, {2}, 1});
  net.layers()[0].w << 1.0, -1.0, 0.5, 2.0;
  net.layers()[0].b << 0.0, -1.0;
  net.layers()[1].w << 3.0, -2.0;
  net.layers()[1].b << 0.25;
  Matrix x(2, 2);
  x << 1.0, 2.0, -1.0, 0.5;
  // Row 0: hidden (-1, 3.5) -> relu (0, 3.5) -> -7 + 0.25. Row 1: (-1.5, -0.5) -> 0 -> 0.25.
  const Matrix out = net.forward(x);
  EXPECT_DOUBLE_EQ(out(0, 0), -6.75);
  EXPECT_DOUBLE_EQ(out(1, 0), 0.25);
}

TEST(InitTest, DeterministicWithZeroBiases) {
  const auto arch = small(CriticForm::kJoint);
  EXPECT_EQ(init_critic(arch, 5), init_critic(arch, 5));
  EXPECT_FALSE(init_critic(arch, 5) == init_critic(arch, 6));
  for (const auto& layer : init_critic(arch, 5).joint.layers()) EXPECT_TRUE(layer.b.isZero(0.0));
  for (const auto& layer : init_critic(small(CriticForm::kSeparable), 1).y_tower.layers()) EXPECT_TRUE(layer.b.isZero(0.0));
}

TEST(InitTest, WeightMomentsMatchUniformBound) {
  CriticArchitecture arch;
  arch.form = CriticForm::kJoint;
  arch.dim = 50;
  arch.widths = {100};
  const auto p = init_critic(arch, 0);
  const Matrix& w = p.joint.layers()[0].w;  // 100 x 100 = 10^4 draws
  const double bound = std::sqrt(6.0 / 200.0);
  const double mean = w.mean();
  const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
  EXPECT_LE(std::abs(mean), 3.0 * std::sqrt(var / static_cast<double>(w.size())));
  EXPECT_NEAR(var, bound * bound / 3.0, 0.05 * bound * bound / 3.0);
  EXPECT_LE(w.cwiseAbs().maxCoeff(), bound);
}

TEST(ScoreMatrixTest, ZeroFinalLayerGivesZeros) {
  for (auto form : {CriticForm::kJoint, CriticForm::kSeparable}) {
    auto p = init_critic(small(form), 2);
    Mlp& last = form == CriticForm::kJoint ? p.joint : p.y_tower;
    last.layers().back().w.setZero();
    last.layers().back().b.setZero();
    EXPECT_TRUE(score_matrix(p, gaussian::sample(kTask, 5, 0)).isZero(0.0));
  }
}

TEST(ScoreMatrixTest, OrthogonalEmbeddingsScoreZero) {
  CriticArchitecture arch = small(CriticForm::kSeparable);
  arch.widths = {};
  arch.embed = 2;
  CriticParams p(arch);
  // h(x) = (x_0, 0), u(y) = (0, y_1).
  p.x_tower.layers()[0].w(0, 0) = 1.0;
  p.y_tower.layers()[0].w(1, 1) = 1.0;
  EXPECT_TRUE(score_matrix(p, gaussian::sample(kTask, 6, 1)).isZero(0.0));
}

double relu(double v) { return v > 0.0 ? v : 0.0; }

// Straightforward per-sample forward pass, written against the raw weights.
std::vector<double> reference_forward(const Mlp& net, const std::vector<double>& in) {
  std::vector<double> a = in;
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const auto& layer = net.layers()[k];
    std::vector<double> z(static_cast<std::size_t>(layer.w.rows()));
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      double acc = layer.b(r);
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) acc += layer.w(r, c) * a[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = k + 1 < net.layers().size() ? relu(acc) : acc;
    }
    a = std::move(z);
  }
  return a;
}

std::vector<double> row_vec(const RowMatrix& m, Eigen::Index i) {
  return std::vector<double>(m.data() + i * m.cols(), m.data() + (i + 1) * m.cols());
}

TEST(ScoreMatrixTest, MatchesIndependentForwardPass) {
  const auto batch = gaussian::sample(kTask, 7, 3);
  const auto joint = init_critic(small(CriticForm::kJoint), 4);
  const auto sep = init_critic(small(CriticForm::kSeparable), 4);
  const auto sj = score_matrix(joint, batch);
  const auto ss = score_matrix(sep, batch);
  for (Eigen::Index i = 0; i < 7; ++i) {
    for (Eigen::Index j = 0; j < 7; ++j) {
      auto in = row_vec(batch.xs, i);
      const auto y = row_vec(batch.ys, j);
      in.insert(in.end(), y.begin(), y.end());
      EXPECT_NEAR(sj(i, j), reference_forward(joint.joint, in)[0], 1e-12);
      const auto h = reference_forward(sep.x_tower, row_vec(batch.xs, i));
      const auto u = reference_forward(sep.y_tower, y);
      double dot = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k) dot += h[k] * u[k];
      EXPECT_NEAR(ss(i, j), dot, 1e-12);
    }
  }
  EXPECT_GT((sj - ss).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ScoreMatrixTest, DeterministicAndExecutionIndependent) {
  const auto batch = gaussian::sample(kTask, 16, 3);
  for (auto form : {CriticForm::kJoint, CriticForm::kSeparable}) {
    const auto p = init_critic(small(form), 8);
    const auto a = score_matrix(p, batch, Execution::kParallel);
    EXPECT_EQ(a, score_matrix(p, batch, Execution::kParallel));
    EXPECT_EQ(a, score_matrix(p, batch, Execution::kSerial));
  }
}

TEST(ScoreMatrixTest, SeparableTouchesEachTowerOncePerSample) {
  const auto batch = gaussian::sample(kTask, 32, 0);
  const auto sep = init_critic(small(CriticForm::kSeparable), 0);
  auto before = Mlp::rows_forwarded();
  score_matrix(sep, batch);
  EXPECT_EQ(Mlp::rows_forwarded() - before, 2u * 32u);
  const auto joint = init_critic(small(CriticForm::kJoint), 0);
  before = Mlp::rows_forwarded();
  score_matrix(joint, batch);
  EXPECT_EQ(Mlp::rows_forwarded() - before, 32u * 32u);
}

TEST(ScoreMatrixTest, RejectsShapeMismatch) {
  const auto p = init_critic(small(CriticForm::kSeparable), 0);
  EXPECT_THROW(score_matrix(p, gaussian::sample(gaussian::GaussianTask(4, 0.1), 4, 0)), ContractViolation);
  EXPECT_THROW(backward(p, gaussian::sample(kTask, 4, 0), RowMatrix::Zero(3, 4)), ContractViolation);
}

TEST(CriticBackwardTest, ZeroUpstreamAndLinearity) {
  const auto batch = gaussian::sample(kTask, 5, 2);
  CounterRng rng(0, stream_id(StreamKind::kTest, 0));
  const RowMatrix up = testing::random_matrix(rng, 5, 5);
  for (auto form : {CriticForm::kJoint, CriticForm::kSeparable}) {
    const auto p = init_critic(small(form), 1);
    for (auto block : backward(p, batch, RowMatrix::Zero(5, 5)).blocks())
      for (double g : block) EXPECT_EQ(g, 0.0);
    const auto g1 = backward(p, batch, up);
    const auto g2 = backward(p, batch, RowMatrix(2.0 * up));
    const auto b1 = g1.blocks();
    const auto b2 = g2.blocks();
    for (std::size_t b = 0; b < b1.size(); ++b)
      for (std::size_t k = 0; k < b1[b].size(); ++k) EXPECT_NEAR(b2[b][k], 2.0 * b1[b][k], 1e-12 * (1.0 + std::abs(b1[b][k])));
  }
}

TEST(CriticBackwardTest, TapePathMatchesRecompute) {
  const auto batch = gaussian::sample(kTask, 6, 2);
  const auto p = init_critic(small(CriticForm::kSeparable), 3);
  CounterRng rng(1, stream_id(StreamKind::kTest, 0));
  const RowMatrix up = testing::random_matrix(rng, 6, 6);
  CriticTape tape;
  score_matrix(p, batch, tape);
  EXPECT_EQ(backward(p, tape, up), backward(p, batch, up));
}

TEST(GradientCheckTest, CriticMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (auto form : {CriticForm::kJoint, CriticForm::kSeparable}) {
      const auto r = testing::critic_instance(seed, form);
      EXPECT_LT(r.max_rel_error, 1e-5) << "seed " << seed;
      EXPECT_GT(r.entries, 0u);
    }
  }
}

TEST(GradientCheckTest, DecoderAndBaselineMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_LT(testing::decoder_instance(seed).max_rel_error, 1e-5) << "seed " << seed;
    EXPECT_LT(testing::baseline_instance(seed).max_rel_error, 1e-5) << "seed " << seed;
  }
}

TEST(BaselineTest, ConstantBaselineIsConstant) {
  const auto b = BaselineParams::constant(3, 1.0);
  const auto v = log_baseline(b, gaussian::sample(kTask, 9, 0).ys);
  for (Eigen::Index k = 0; k < v.size(); ++k) EXPECT_EQ(v(k), 1.0);
}

TEST(DecoderTest, ExactConditionalDensity) {
  // mu(y) = rho y, variance 1 - rho^2: the true p(x | y).
  DecoderParams p(DecoderArchitecture{3, {}});
  p.mean.layers()[0].w = Matrix::Identity(3, 3) * 0.5;
  p.log_var.setConstant(std::log(0.75));
  const auto batch = gaussian::sample(kTask, 10, 4);
  const auto lq = decoder_log_density(p, batch);
  for (Eigen::Index i = 0; i < 10; ++i) {
    // p(x|y) with roles swapped has the same form as p(y|x).
    EXPECT_NEAR(lq(i), gaussian::cond_log_density(kTask, gaussian::row_span(batch.xs, i), gaussian::row_span(batch.ys, i)),
                1e-12);
  }
}

TEST(AdamTest, ZeroGradientsLeaveParamsUnchanged) {
  FlatParams p{{0.5, -2.0, 3.0}};
  const FlatParams zero{{0.0, 0.0, 0.0}};
  auto state = AdamState::for_params(p);
  for (int k = 0; k < 5; ++k) adam_step(state, p, zero);
  EXPECT_EQ(p.values, (std::vector<double>{0.5, -2.0, 3.0}));
  EXPECT_EQ(state.step(), 5u);
}

TEST(AdamTest, FirstStepHasMagnitudeLr) {
  FlatParams p{{0.0}};
  auto state = AdamState::for_params(p, AdamConfig{0.1, 0.9, 0.999, 1e-8});
  adam_step(state, p, FlatParams{{1.0}});
  // m_hat = 1, v_hat = 1: p = -0.1 / (1 + 1e-8).
  EXPECT_NEAR(p.values[0], -0.1, 1e-8);
}

TEST(AdamTest, ConstantGradientsMoveMonotonically) {
  FlatParams p{{1.0, 1.0}};
  auto state = AdamState::for_params(p);
  const FlatParams g{{2.0, -0.5}};
  double prev0 = p.values[0];
  double prev1 = p.values[1];
  for (int k = 0; k < 100; ++k) {
    adam_step(state, p, g);
    EXPECT_LT(p.values[0], prev0);
    EXPECT_GT(p.values[1], prev1);
    prev0 = p.values[0];
    prev1 = p.values[1];
  }
}

TEST(AdamTest, RejectsShapeMismatch) {
  FlatParams p{{1.0, 2.0}};
  auto state = AdamState::for_params(p);
  EXPECT_THROW(adam_step(state, p, FlatParams{{1.0}}), ContractViolation);
}

}  // namespace
}  // namespace mitk::nn
