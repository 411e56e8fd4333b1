#include "mitk/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "mitk/error.hpp"

namespace mitk::gaussian {

GaussianTask::GaussianTask(std::size_t dim, double rho) : dim_(dim), rho_(rho), noise_scale_(0.0) {
  require(dim >= 1, "GaussianTask: dim must be >= 1");
  require(std::isfinite(rho) && std::abs(rho) < 1.0, "GaussianTask: |rho| must be < 1");
  noise_scale_ = std::sqrt((1.0 - rho) * (1.0 + rho));
}

GaussianTask GaussianTask::from_target_mi(std::size_t dim, double target_mi) {
  return GaussianTask(dim, rho_for_mi(dim, target_mi));
}

double true_mi(const GaussianTask& task) {
  const double r = task.rho();
  return -0.5 * static_cast<double>(task.dim()) * std::log1p(-r * r);
}

double marginal_entropy(const GaussianTask& task) {
  return 0.5 * static_cast<double>(task.dim()) * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

double rho_for_mi(std::size_t dim, double mi) {
  require(dim >= 1, "rho_for_mi: dim must be >= 1");
  require(std::isfinite(mi) && mi >= 0.0, "rho_for_mi: target MI must be finite and >= 0");
  return std::sqrt(-std::expm1(-2.0 * mi / static_cast<double>(dim)));
}

SampleBatch sample(const GaussianTask& task, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  require(n >= 2, "sample: batch size must be >= 2");
  const std::size_t d = task.dim();
  SampleBatch batch{RowMatrix(n, d), RowMatrix(n, d), seed, stream};
  CounterRng rng(seed, stream);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) batch.xs(i, k) = rng.normal();
    for (std::size_t k = 0; k < d; ++k) batch.ys(i, k) = task.rho() * batch.xs(i, k) + task.noise_scale() * rng.normal();
  }
  return batch;
}

double cond_log_density(const GaussianTask& task, std::span<const double> y, std::span<const double> x) {
  require(y.size() == task.dim() && x.size() == task.dim(), "cond_log_density: dimension mismatch");
  const double var = task.noise_scale() * task.noise_scale();
  double sq = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double r = y[k] - task.rho() * x[k];
    sq += r * r;
  }
  return -0.5 * static_cast<double>(task.dim()) * std::log(2.0 * std::numbers::pi * var) - 0.5 * sq / var;
}

double marginal_log_density(const GaussianTask& task, std::span<const double> y) {
  require(y.size() == task.dim(), "marginal_log_density: dimension mismatch");
  double sq = 0.0;
  for (double v : y) sq += v * v;
  return -0.5 * static_cast<double>(task.dim()) * std::log(2.0 * std::numbers::pi) - 0.5 * sq;
}

}  // namespace mitk::gaussian
