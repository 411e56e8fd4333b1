#include "mitk/kernels.hpp"

#include <cmath>
#include <limits>

#include "mitk/error.hpp"

namespace mitk::kernels {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_square(const RowMatrix& s, const char* what) {
  require(s.rows() == s.cols() && s.rows() >= 2, std::string(what) + ": expected a square matrix with n >= 2");
}

double row_lse(const RowMatrix& s, Eigen::Index i, bool skip_diagonal) {
  double m = kNegInf;
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    if (!(skip_diagonal && j == i)) m = std::max(m, s(i, j));
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    if (!(skip_diagonal && j == i)) acc += std::exp(s(i, j) - m);
  return m + std::log(acc);
}

double row_offdiag_max(const RowMatrix& s, Eigen::Index i) {
  double m = kNegInf;
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    if (j != i) m = std::max(m, s(i, j));
  return m;
}

double row_offdiag_shifted_sum(const RowMatrix& s, Eigen::Index i, double shift) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    if (j != i) acc += std::exp(s(i, j) - shift);
  return acc;
}

double column_mean(const RowMatrix& s, Eigen::Index j, double shift) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    if (i != j) acc += std::exp(s(i, j) - shift);
  return acc / static_cast<double>(s.rows() - 1);
}

void cond_row(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys, Eigen::Index i,
              RowMatrix& out) {
  for (Eigen::Index j = 0; j < xs.rows(); ++j)
    out(i, j) = gaussian::cond_log_density(task, gaussian::row_span(ys, i), gaussian::row_span(xs, j));
}

void check_pair(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys) {
  require(xs.rows() == ys.rows() && xs.cols() == ys.cols() && static_cast<std::size_t>(xs.cols()) == task.dim(),
          "cond_log_density_matrix: shape mismatch");
}

}  // namespace

namespace serial {

RowMatrix cond_log_density_matrix(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys) {
  check_pair(task, xs, ys);
  RowMatrix out(xs.rows(), xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) cond_row(task, xs, ys, i, out);
  return out;
}

VectorXd row_log_sum_exp(const RowMatrix& s, bool skip_diagonal) {
  if (skip_diagonal) require_square(s, "row_log_sum_exp");
  VectorXd out(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) out(i) = row_lse(s, i, skip_diagonal);
  return out;
}

double offdiag_log_sum_exp(const RowMatrix& s) {
  require_square(s, "offdiag_log_sum_exp");
  double m = kNegInf;
  for (Eigen::Index i = 0; i < s.rows(); ++i) m = std::max(m, row_offdiag_max(s, i));
  if (!std::isfinite(m)) return m;
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) total += row_offdiag_shifted_sum(s, i, m);
  return m + std::log(total);
}

VectorXd column_offdiag_mean_exp(const RowMatrix& s, const VectorXd& shift) {
  require_square(s, "column_offdiag_mean_exp");
  require(shift.size() == s.cols(), "column_offdiag_mean_exp: one shift per column required");
  VectorXd out(s.cols());
  for (Eigen::Index j = 0; j < s.cols(); ++j) out(j) = column_mean(s, j, shift(j));
  return out;
}

}  // namespace serial

namespace parallel {

RowMatrix cond_log_density_matrix(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys) {
  check_pair(task, xs, ys);
  RowMatrix out(xs.rows(), xs.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < xs.rows(); ++i) cond_row(task, xs, ys, i, out);
  return out;
}

VectorXd row_log_sum_exp(const RowMatrix& s, bool skip_diagonal) {
  if (skip_diagonal) require_square(s, "row_log_sum_exp");
  VectorXd out(s.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < s.rows(); ++i) out(i) = row_lse(s, i, skip_diagonal);
  return out;
}

double offdiag_log_sum_exp(const RowMatrix& s) {
  require_square(s, "offdiag_log_sum_exp");
  const Eigen::Index n = s.rows();
  double m = kNegInf;
#pragma omp parallel for schedule(static) reduction(max : m)
  for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, row_offdiag_max(s, i));
  if (!std::isfinite(m)) return m;
  // Per-row partial sums, then an ordered combination matching the serial loop.
  VectorXd partial(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) partial(i) = row_offdiag_shifted_sum(s, i, m);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += partial(i);
  return m + std::log(total);
}

VectorXd column_offdiag_mean_exp(const RowMatrix& s, const VectorXd& shift) {
  require_square(s, "column_offdiag_mean_exp");
  require(shift.size() == s.cols(), "column_offdiag_mean_exp: one shift per column required");
  VectorXd out(s.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < s.cols(); ++j) out(j) = column_mean(s, j, shift(j));
  return out;
}

}  // namespace parallel

RowMatrix cond_log_density_matrix(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys,
                                  Execution ex) {
  return ex == Execution::kParallel ? parallel::cond_log_density_matrix(task, xs, ys)
                                    : serial::cond_log_density_matrix(task, xs, ys);
}

VectorXd row_log_sum_exp(const RowMatrix& s, bool skip_diagonal, Execution ex) {
  return ex == Execution::kParallel ? parallel::row_log_sum_exp(s, skip_diagonal)
                                    : serial::row_log_sum_exp(s, skip_diagonal);
}

double offdiag_log_sum_exp(const RowMatrix& s, Execution ex) {
  return ex == Execution::kParallel ? parallel::offdiag_log_sum_exp(s) : serial::offdiag_log_sum_exp(s);
}

VectorXd column_offdiag_mean_exp(const RowMatrix& s, const VectorXd& shift, Execution ex) {
  return ex == Execution::kParallel ? parallel::column_offdiag_mean_exp(s, shift)
                                    : serial::column_offdiag_mean_exp(s, shift);
}

}  // namespace mitk::kernels
