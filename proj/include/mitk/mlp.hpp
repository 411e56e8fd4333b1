#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mitk/rng.hpp"

// Fully connected ReLU network with a linear output layer and hand-written
// reverse-mode gradients. Activations are n x width (one row per sample).
namespace mitk::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Architecture {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  std::size_t output = 1;
};

struct DenseLayer {
  Matrix w;  // out x in
  Vector b;  // out
};

class Mlp {
 public:
  struct Tape {
    // inputs[k] is the activation fed into layer k; inputs[0] is the network input.
    std::vector<Matrix> inputs;
    // Pre-activations of the hidden layers (ReLU masks).
    std::vector<Matrix> pre;
  };

  Mlp() = default;
  // All parameters zero.
  explicit Mlp(const Architecture& arch);
  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp glorot(const Architecture& arch, CounterRng& rng);

  [[nodiscard]] const Architecture& architecture() const noexcept { return arch_; }
  [[nodiscard]] std::vector<DenseLayer>& layers() noexcept { return layers_; }
  [[nodiscard]] const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  [[nodiscard]] Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Tape& tape) const;
  // Adds d(sum d_out . out)/d(params) into grads and returns the gradient with
  // respect to the network input.
  Matrix backward(const Tape& tape, const Matrix& d_out, Mlp& grads) const;

  [[nodiscard]] std::vector<std::span<double>> blocks();
  [[nodiscard]] std::vector<std::span<const double>> blocks() const;
  [[nodiscard]] std::size_t parameter_count() const;
  void set_zero();
  [[nodiscard]] bool all_finite() const;

  // Total number of sample rows pushed through any Mlp::forward since start-up.
  static std::uint64_t rows_forwarded();

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  Architecture arch_;
  std::vector<DenseLayer> layers_;
};

// Validates widths (all nonzero) and throws ContractViolation otherwise.
void check_architecture(const Architecture& arch);

}  // namespace mitk::nn
