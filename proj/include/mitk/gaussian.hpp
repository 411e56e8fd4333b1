#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "mitk/rng.hpp"

// Correlated Gaussian pairs: X ~ N(0, I_d), Y = rho X + sqrt(1 - rho^2) E with
// E ~ N(0, I_d) independent of X. Every coordinate pair has correlation rho.
namespace mitk::gaussian {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class GaussianTask {
 public:
  GaussianTask(std::size_t dim, double rho);
  // Chooses rho >= 0 so that true_mi() equals target_mi.
  static GaussianTask from_target_mi(std::size_t dim, double target_mi);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] double rho() const noexcept { return rho_; }
  // sqrt(1 - rho^2), the conditional standard deviation of each Y coordinate.
  [[nodiscard]] double noise_scale() const noexcept { return noise_scale_; }

 private:
  std::size_t dim_;
  double rho_;
  double noise_scale_;
};

// -(d/2) ln(1 - rho^2).
double true_mi(const GaussianTask& task);
// Differential entropy of X (and of Y): (d/2) ln(2 pi e).
double marginal_entropy(const GaussianTask& task);
// Inverse of true_mi in rho for fixed d: sqrt(1 - exp(-2 mi / d)).
double rho_for_mi(std::size_t dim, double mi);

struct SampleBatch {
  RowMatrix xs;  // n x d
  RowMatrix ys;  // n x d
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(xs.rows()); }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(xs.cols()); }
};

// n pairs drawn from the counter stream (seed, stream); row i uses d normals
// for x_i followed by d for the noise. Requires n >= 2.
SampleBatch sample(const GaussianTask& task, std::size_t n, std::uint64_t seed,
                   std::uint64_t stream = stream_id(StreamKind::kSample, 0));

// ln N(y; rho x, (1 - rho^2) I_d).
double cond_log_density(const GaussianTask& task, std::span<const double> y, std::span<const double> x);
// ln N(y; 0, I_d).
double marginal_log_density(const GaussianTask& task, std::span<const double> y);

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace mitk::gaussian
