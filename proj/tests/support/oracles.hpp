#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mitk/gaussian.hpp"

namespace mitk::testing {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

// Closed form written out here rather than taken from the library.
inline double gaussian_mi_oracle(std::size_t dim, double rho) {
  return -0.5 * static_cast<double>(dim) * std::log(1.0 - rho * rho);
}

// Per-sample ln p(y|x) - ln p(y) over n pairs, in chunks of `chunk` rows.
inline MeanSe gaussian_log_ratio_mc(std::size_t dim, double rho, std::size_t n, std::uint64_t seed,
                                    std::size_t chunk = 10000) {
  const gaussian::GaussianTask task(dim, rho);
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t start = 0, k = 0; start < n; start += chunk, ++k) {
    const std::size_t rows = std::min(chunk, n - start);
    const auto batch = gaussian::sample(task, rows, seed, stream_id(StreamKind::kTest, 1000 + k));
    for (Eigen::Index i = 0; i < batch.xs.rows(); ++i) {
      const auto x = gaussian::row_span(batch.xs, i);
      const auto y = gaussian::row_span(batch.ys, i);
      values.push_back(gaussian::cond_log_density(task, y, x) - gaussian::marginal_log_density(task, y));
    }
  }
  return mean_se(values);
}

// Trapezoid rule over [-half_width, half_width]^2 of
// p(x, y) ln[p(x, y) / (p(x) p(y))] for the unit-variance bivariate normal.
inline double bivariate_mi_quadrature(double rho, double half_width = 12.0, std::size_t points = 1201) {
  const double h = 2.0 * half_width / static_cast<double>(points - 1);
  const double one_minus = 1.0 - rho * rho;
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(one_minus));
  double acc = 0.0;
  for (std::size_t a = 0; a < points; ++a) {
    const double x = -half_width + h * static_cast<double>(a);
    const double wx = (a == 0 || a + 1 == points) ? 0.5 : 1.0;
    for (std::size_t b = 0; b < points; ++b) {
      const double y = -half_width + h * static_cast<double>(b);
      const double wy = (b == 0 || b + 1 == points) ? 0.5 : 1.0;
      const double q = (x * x - 2.0 * rho * x * y + y * y) / one_minus;
      const double log_joint = std::log(norm) - 0.5 * q;
      const double log_marginals = -std::log(2.0 * std::numbers::pi) - 0.5 * (x * x + y * y);
      acc += wx * wy * std::exp(log_joint) * (log_joint - log_marginals);
    }
  }
  return acc * h * h;
}

}  // namespace mitk::testing
