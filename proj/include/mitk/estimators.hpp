#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "mitk/critic.hpp"
#include "mitk/decoder.hpp"
#include "mitk/execution.hpp"
#include "mitk/gaussian.hpp"

// Batch-level MI estimates. Critic-based bounds read an n x n score matrix
// S(i, j) = g(x_i, y_j): the diagonal holds the paired samples and the
// off-diagonal entries stand in for draws from P_X P_Y.
namespace mitk::estimators {

using gaussian::GaussianTask;
using gaussian::RowMatrix;
using gaussian::SampleBatch;
using Eigen::VectorXd;

enum class EstimatorKind { kBaUpper, kBaLower, kL1Out, kDv, kTuba, kNwj, kInfoNce };
enum class BoundDirection { kUpper, kLower };

inline constexpr std::array<EstimatorKind, 7> kAllEstimators = {
    EstimatorKind::kBaUpper, EstimatorKind::kBaLower, EstimatorKind::kL1Out, EstimatorKind::kDv,
    EstimatorKind::kTuba,    EstimatorKind::kNwj,     EstimatorKind::kInfoNce};

// "ba_upper", "ba_lower", "l1out", "dv", "tuba", "nwj", "infonce".
std::string_view tag(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator(std::string_view tag);
BoundDirection direction(EstimatorKind kind);
bool uses_critic(EstimatorKind kind);
bool uses_baseline(EstimatorKind kind);
bool uses_decoder(EstimatorKind kind);
bool is_trainable(EstimatorKind kind);

// ---- tractable-density bounds ----------------------------------------------------

using CondLogDensity = std::function<double(std::span<const double> y, std::span<const double> x)>;
using MarginalLogDensity = std::function<double(std::span<const double> y)>;

// (1/n) sum_i [ln p(y_i | x_i) - ln q(y_i)].
double est_ba_upper(const SampleBatch& batch, const CondLogDensity& cond, const MarginalLogDensity& marginal);
// With q the true marginal of the task.
double est_ba_upper(const GaussianTask& task, const SampleBatch& batch);

// (1/n) sum_i ln q(x_i | y_i) + h(X).
double est_ba_lower(const SampleBatch& batch, const nn::DecoderParams& decoder, double entropy_hx);

// Leave-one-out bound from L(i, j) = ln p(y_i | x_j):
// (1/K) sum_i [L_ii - ln((1/(K-1)) sum_{j != i} e^{L_ij})].
double est_l1out(const RowMatrix& log_cond, Execution ex = Execution::kParallel);
double est_l1out(const SampleBatch& batch, const CondLogDensity& cond);
double est_l1out(const GaussianTask& task, const SampleBatch& batch, Execution ex = Execution::kParallel);

// ---- critic bounds on a score matrix ---------------------------------------------

// mean_i S_ii - ln mean_{i != j} e^{S_ij}.
double est_dv(const RowMatrix& s, Execution ex = Execution::kParallel);
// mean_i S_ii - (1/n) sum_j [Z_j / a_j + ln a_j - 1], Z_j = mean_{i != j} e^{S_ij}.
double est_tuba(const RowMatrix& s, const VectorXd& log_a, Execution ex = Execution::kParallel);
// est_tuba with a = e everywhere; same arithmetic, so the two agree bitwise.
double est_nwj(const RowMatrix& s, Execution ex = Execution::kParallel);
// (1/K) sum_i [S_ii - ln((1/K) sum_j e^{S_ij})]; never exceeds ln K.
double est_infonce(const RowMatrix& s, Execution ex = Execution::kParallel);
// mean_i S_ii - (1/n) sum_j ln Z_j with the log-partition estimated from the
// same batch. Biased; for diagnostics only.
double est_uba_diagnostic(const RowMatrix& s, Execution ex = Execution::kParallel);

// Convenience overloads scoring the batch first.
double est_dv(const nn::CriticParams& critic, const SampleBatch& batch);
double est_tuba(const nn::CriticParams& critic, const nn::BaselineParams& baseline, const SampleBatch& batch);
double est_nwj(const nn::CriticParams& critic, const SampleBatch& batch);
double est_infonce(const nn::CriticParams& critic, const SampleBatch& batch);

struct BoundGradient {
  double value = 0.0;   // bitwise equal to the matching est_* value
  RowMatrix d_scores;   // d value / d S
  VectorXd d_log_a;     // d value / d ln a(y_j); TUBA only
};

BoundGradient dv_gradient(const RowMatrix& s, Execution ex = Execution::kParallel);
BoundGradient tuba_gradient(const RowMatrix& s, const VectorXd& log_a, Execution ex = Execution::kParallel);
BoundGradient nwj_gradient(const RowMatrix& s, Execution ex = Execution::kParallel);
BoundGradient infonce_gradient(const RowMatrix& s, Execution ex = Execution::kParallel);

}  // namespace mitk::estimators
