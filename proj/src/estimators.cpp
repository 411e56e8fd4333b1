#include "mitk/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mitk/error.hpp"
#include "mitk/kernels.hpp"

namespace mitk::estimators {
namespace {

void require_scores(const RowMatrix& s, const char* what) {
  require(s.rows() == s.cols() && s.rows() >= 2, std::string(what) + ": score matrix must be n x n with n >= 2");
}

double mean_diagonal(const RowMatrix& s) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) acc += s(i, i);
  return acc / static_cast<double>(s.rows());
}

// Shared by TUBA and NWJ so that a = e reproduces NWJ bit for bit.
double tuba_value(const RowMatrix& s, const VectorXd& log_a, const VectorXd& z) {
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < s.cols(); ++j) penalty += z(j) + (log_a(j) - 1.0);
  return mean_diagonal(s) - penalty / static_cast<double>(s.cols());
}

BoundGradient tuba_impl(const RowMatrix& s, const VectorXd& log_a, Execution ex) {
  const Eigen::Index n = s.rows();
  const VectorXd z = kernels::column_offdiag_mean_exp(s, log_a, ex);
  BoundGradient out;
  out.value = tuba_value(s, log_a, z);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_pairs = inv_n / static_cast<double>(n - 1);
  out.d_scores.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.d_scores(i, j) = i == j ? inv_n : -inv_pairs * std::exp(s(i, j) - log_a(j));
  out.d_log_a = (z.array() - 1.0) * inv_n;
  return out;
}

}  // namespace

std::string_view tag(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kBaUpper: return "ba_upper";
    case EstimatorKind::kBaLower: return "ba_lower";
    case EstimatorKind::kL1Out: return "l1out";
    case EstimatorKind::kDv: return "dv";
    case EstimatorKind::kTuba: return "tuba";
    case EstimatorKind::kNwj: return "nwj";
    case EstimatorKind::kInfoNce: return "infonce";
  }
  return "unknown";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name) {
  for (EstimatorKind kind : kAllEstimators)
    if (tag(kind) == name) return kind;
  return std::nullopt;
}

BoundDirection direction(EstimatorKind kind) {
  return kind == EstimatorKind::kBaUpper || kind == EstimatorKind::kL1Out ? BoundDirection::kUpper
                                                                           : BoundDirection::kLower;
}

bool uses_critic(EstimatorKind kind) {
  return kind == EstimatorKind::kDv || kind == EstimatorKind::kTuba || kind == EstimatorKind::kNwj ||
         kind == EstimatorKind::kInfoNce;
}
bool uses_baseline(EstimatorKind kind) { return kind == EstimatorKind::kTuba; }
bool uses_decoder(EstimatorKind kind) { return kind == EstimatorKind::kBaLower; }
bool is_trainable(EstimatorKind kind) { return uses_critic(kind) || uses_decoder(kind); }

// ---- tractable-density bounds ----------------------------------------------------

double est_ba_upper(const SampleBatch& batch, const CondLogDensity& cond, const MarginalLogDensity& marginal) {
  require(batch.size() >= 1, "est_ba_upper: empty batch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < batch.xs.rows(); ++i) {
    const auto y = gaussian::row_span(batch.ys, i);
    acc += cond(y, gaussian::row_span(batch.xs, i)) - marginal(y);
  }
  return acc / static_cast<double>(batch.size());
}

double est_ba_upper(const GaussianTask& task, const SampleBatch& batch) {
  return est_ba_upper(
      batch, [&](auto y, auto x) { return gaussian::cond_log_density(task, y, x); },
      [&](auto y) { return gaussian::marginal_log_density(task, y); });
}

double est_ba_lower(const SampleBatch& batch, const nn::DecoderParams& decoder, double entropy_hx) {
  const VectorXd lq = nn::decoder_log_density(decoder, batch);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lq.size(); ++i) acc += lq(i);
  return acc / static_cast<double>(lq.size()) + entropy_hx;
}

double est_l1out(const RowMatrix& log_cond, Execution ex) {
  require_scores(log_cond, "est_l1out");
  const Eigen::Index n = log_cond.rows();
  const VectorXd lse = kernels::row_log_sum_exp(log_cond, true, ex);
  const double log_others = std::log(static_cast<double>(n - 1));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += log_cond(i, i) - (lse(i) - log_others);
  return acc / static_cast<double>(n);
}

double est_l1out(const SampleBatch& batch, const CondLogDensity& cond) {
  const Eigen::Index n = batch.xs.rows();
  RowMatrix l(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) l(i, j) = cond(gaussian::row_span(batch.ys, i), gaussian::row_span(batch.xs, j));
  return est_l1out(l, Execution::kSerial);
}

double est_l1out(const GaussianTask& task, const SampleBatch& batch, Execution ex) {
  return est_l1out(kernels::cond_log_density_matrix(task, batch.xs, batch.ys, ex), ex);
}

// ---- critic bounds ------------------------------------------------------------

double est_dv(const RowMatrix& s, Execution ex) { return dv_gradient(s, ex).value; }

double est_tuba(const RowMatrix& s, const VectorXd& log_a, Execution ex) {
  require_scores(s, "est_tuba");
  require(log_a.size() == s.cols(), "est_tuba: one baseline value per column required");
  return tuba_value(s, log_a, kernels::column_offdiag_mean_exp(s, log_a, ex));
}

double est_nwj(const RowMatrix& s, Execution ex) {
  require_scores(s, "est_nwj");
  return est_tuba(s, VectorXd::Constant(s.cols(), 1.0), ex);
}

double est_infonce(const RowMatrix& s, Execution ex) {
  require_scores(s, "est_infonce");
  const VectorXd lse = kernels::row_log_sum_exp(s, false, ex);
  // Each row term is <= 0, so the result cannot round above ln K.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) acc += std::min(0.0, s(i, i) - lse(i));
  return acc / static_cast<double>(s.rows()) + std::log(static_cast<double>(s.rows()));
}

double est_uba_diagnostic(const RowMatrix& s, Execution ex) {
  require_scores(s, "est_uba_diagnostic");
  const Eigen::Index n = s.rows();
  VectorXd shift(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) m = std::max(m, s(i, j));
    shift(j) = m;
  }
  const VectorXd z = kernels::column_offdiag_mean_exp(s, shift, ex);
  double log_partition = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) log_partition += shift(j) + std::log(z(j));
  return mean_diagonal(s) - log_partition / static_cast<double>(n);
}

double est_dv(const nn::CriticParams& critic, const SampleBatch& batch) { return est_dv(nn::score_matrix(critic, batch)); }

double est_tuba(const nn::CriticParams& critic, const nn::BaselineParams& baseline, const SampleBatch& batch) {
  return est_tuba(nn::score_matrix(critic, batch), nn::log_baseline(baseline, batch.ys));
}

double est_nwj(const nn::CriticParams& critic, const SampleBatch& batch) { return est_nwj(nn::score_matrix(critic, batch)); }

double est_infonce(const nn::CriticParams& critic, const SampleBatch& batch) {
  return est_infonce(nn::score_matrix(critic, batch));
}

// ---- gradients ------------------------------------------------------------------

BoundGradient dv_gradient(const RowMatrix& s, Execution ex) {
  require_scores(s, "est_dv");
  const Eigen::Index n = s.rows();
  const double lse = kernels::offdiag_log_sum_exp(s, ex);
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  BoundGradient out;
  out.value = mean_diagonal(s) - (lse - std::log(pairs));
  const double inv_n = 1.0 / static_cast<double>(n);
  out.d_scores.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.d_scores(i, j) = i == j ? inv_n : -std::exp(s(i, j) - lse);
  return out;
}

BoundGradient tuba_gradient(const RowMatrix& s, const VectorXd& log_a, Execution ex) {
  require_scores(s, "est_tuba");
  require(log_a.size() == s.cols(), "est_tuba: one baseline value per column required");
  return tuba_impl(s, log_a, ex);
}

BoundGradient nwj_gradient(const RowMatrix& s, Execution ex) {
  require_scores(s, "est_nwj");
  BoundGradient out = tuba_impl(s, VectorXd::Constant(s.cols(), 1.0), ex);
  out.d_log_a.resize(0);
  return out;
}

BoundGradient infonce_gradient(const RowMatrix& s, Execution ex) {
  require_scores(s, "est_infonce");
  const Eigen::Index n = s.rows();
  const VectorXd lse = kernels::row_log_sum_exp(s, false, ex);
  BoundGradient out;
  out.value = est_infonce(s, ex);
  const double inv_n = 1.0 / static_cast<double>(n);
  out.d_scores.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.d_scores(i, j) = inv_n * ((i == j ? 1.0 : 0.0) - std::exp(s(i, j) - lse(i)));
  return out;
}

}  // namespace mitk::estimators
