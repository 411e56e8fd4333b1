#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mitk/execution.hpp"
#include "mitk/gaussian.hpp"
#include "mitk/mlp.hpp"

// Critic g(x, y) and baseline log a(y).
//
// A joint critic runs one network on the concatenation [x, y]; scoring a batch
// costs n^2 forward rows. A separable critic scores <h(x), u(y)> with two
// towers of equal embedding width, so the n x n matrix needs only n rows per
// tower and one matrix product.
namespace mitk::nn {

using gaussian::RowMatrix;
using gaussian::SampleBatch;

enum class CriticForm { kJoint, kSeparable };

struct CriticArchitecture {
  CriticForm form = CriticForm::kSeparable;
  std::size_t dim = 20;
  std::vector<std::size_t> widths{256, 256};
  std::size_t embed = 32;  // separable only
};

class CriticParams {
 public:
  CriticParams() = default;
  // All parameters zero.
  explicit CriticParams(const CriticArchitecture& arch);

  [[nodiscard]] const CriticArchitecture& architecture() const noexcept { return arch_; }
  [[nodiscard]] CriticForm form() const noexcept { return arch_.form; }
  // joint form: the single network; separable: unused.
  Mlp joint;
  Mlp x_tower;
  Mlp y_tower;

  [[nodiscard]] std::vector<std::span<double>> blocks();
  [[nodiscard]] std::vector<std::span<const double>> blocks() const;
  [[nodiscard]] bool all_finite() const;
  friend bool operator==(const CriticParams&, const CriticParams&);

 private:
  CriticArchitecture arch_;
};

// Glorot-uniform weights and zero biases from the counter stream (seed, kInit).
CriticParams init_critic(const CriticArchitecture& arch, std::uint64_t seed, std::uint64_t stream_index = 0);

// Forward state kept for backward on the separable path.
struct CriticTape {
  Mlp::Tape x_tape;
  Mlp::Tape y_tape;
  Matrix h;  // n x embed
  Matrix u;  // n x embed
};

// (i, j) = g(x_i, y_j).
RowMatrix score_matrix(const CriticParams& params, const SampleBatch& batch, Execution ex = Execution::kParallel);
RowMatrix score_matrix(const CriticParams& params, const SampleBatch& batch, CriticTape& tape,
                       Execution ex = Execution::kParallel);

// Gradient of sum_ij upstream_ij * g(x_i, y_j) with respect to every parameter.
CriticParams backward(const CriticParams& params, const SampleBatch& batch, const RowMatrix& upstream);
// Same, reusing the tape of a separable forward pass on the same batch.
CriticParams backward(const CriticParams& params, const CriticTape& tape, const RowMatrix& upstream);

struct BaselineArchitecture {
  std::size_t dim = 20;
  std::vector<std::size_t> widths{64, 64};
};

class BaselineParams {
 public:
  BaselineParams() = default;
  explicit BaselineParams(const BaselineArchitecture& arch);
  // log a(y) = log_a for every y: no hidden layers, zero weights, bias log_a.
  static BaselineParams constant(std::size_t dim, double log_a);

  Mlp net;

  [[nodiscard]] std::vector<std::span<double>> blocks() { return net.blocks(); }
  [[nodiscard]] std::vector<std::span<const double>> blocks() const { return net.blocks(); }
  [[nodiscard]] bool all_finite() const { return net.all_finite(); }
};

BaselineParams init_baseline(const BaselineArchitecture& arch, std::uint64_t seed, std::uint64_t stream_index = 1);

// log a(y_j) per row of ys.
Vector log_baseline(const BaselineParams& params, const RowMatrix& ys);
Vector log_baseline(const BaselineParams& params, const RowMatrix& ys, Mlp::Tape& tape);
// Gradient of sum_j upstream_j * log a(y_j).
BaselineParams backward(const BaselineParams& params, const Mlp::Tape& tape, const Vector& upstream);

}  // namespace mitk::nn
