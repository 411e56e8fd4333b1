#pragma once

#include <Eigen/Dense>

#include "mitk/execution.hpp"
#include "mitk/gaussian.hpp"

// Dense reductions over n x n score and density matrices. `serial` holds the
// plain reference loops; `parallel` splits the same per-row (or per-column)
// work across OpenMP threads and combines partial results in a fixed order,
// so both namespaces return bitwise-identical values.
namespace mitk::kernels {

using gaussian::RowMatrix;
using Eigen::VectorXd;

namespace serial {

// (i, j) = ln p(y_i | x_j).
RowMatrix cond_log_density_matrix(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys);
// ln sum_j e^{s_ij} per row, optionally leaving out j = i.
VectorXd row_log_sum_exp(const RowMatrix& s, bool skip_diagonal);
// ln sum_{i != j} e^{s_ij}.
double offdiag_log_sum_exp(const RowMatrix& s);
// (1 / (n-1)) sum_{i != j} e^{s_ij - shift_j} per column j.
VectorXd column_offdiag_mean_exp(const RowMatrix& s, const VectorXd& shift);

}  // namespace serial

namespace parallel {

RowMatrix cond_log_density_matrix(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys);
VectorXd row_log_sum_exp(const RowMatrix& s, bool skip_diagonal);
double offdiag_log_sum_exp(const RowMatrix& s);
VectorXd column_offdiag_mean_exp(const RowMatrix& s, const VectorXd& shift);

}  // namespace parallel

RowMatrix cond_log_density_matrix(const gaussian::GaussianTask& task, const RowMatrix& xs, const RowMatrix& ys,
                                  Execution ex);
VectorXd row_log_sum_exp(const RowMatrix& s, bool skip_diagonal, Execution ex);
double offdiag_log_sum_exp(const RowMatrix& s, Execution ex);
VectorXd column_offdiag_mean_exp(const RowMatrix& s, const VectorXd& shift, Execution ex);

}  // namespace mitk::kernels
