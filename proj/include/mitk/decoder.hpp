#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mitk/gaussian.hpp"
#include "mitk/mlp.hpp"

// Variational conditional q(x | y) = N(x; mu(y), diag(exp(log_var))) with an
// MLP mean and one learnable log-variance per coordinate.
namespace mitk::nn {

struct DecoderArchitecture {
  std::size_t dim = 20;
  std::vector<std::size_t> widths{256, 256};
};

class DecoderParams {
 public:
  DecoderParams() = default;
  // Zero mean network and unit variances.
  explicit DecoderParams(const DecoderArchitecture& arch);

  Mlp mean;
  Vector log_var;

  [[nodiscard]] std::vector<std::span<double>> blocks();
  [[nodiscard]] std::vector<std::span<const double>> blocks() const;
  [[nodiscard]] bool all_finite() const { return mean.all_finite() && log_var.allFinite(); }
};

DecoderParams init_decoder(const DecoderArchitecture& arch, std::uint64_t seed, std::uint64_t stream_index = 2);

// ln q(x_i | y_i) for every pair of the batch.
Vector decoder_log_density(const DecoderParams& params, const gaussian::SampleBatch& batch);
Vector decoder_log_density(const DecoderParams& params, const gaussian::SampleBatch& batch, Mlp::Tape& tape,
                           Matrix& mean_out);
// Gradient of sum_i upstream_i * ln q(x_i | y_i).
DecoderParams backward(const DecoderParams& params, const gaussian::SampleBatch& batch, const Mlp::Tape& tape,
                       const Matrix& mean_out, const Vector& upstream);

}  // namespace mitk::nn
