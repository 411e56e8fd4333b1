#include "mitk/decoder.hpp"

#include <cmath>
#include <numbers>

#include "mitk/error.hpp"

namespace mitk::nn {
namespace {

Architecture mean_arch(const DecoderArchitecture& a) { return Architecture{a.dim, a.widths, a.dim}; }

}  // namespace

DecoderParams::DecoderParams(const DecoderArchitecture& arch)
    : mean(mean_arch(arch)), log_var(Vector::Zero(static_cast<Eigen::Index>(arch.dim))) {}

std::vector<std::span<double>> DecoderParams::blocks() {
  auto out = mean.blocks();
  out.emplace_back(log_var.data(), static_cast<std::size_t>(log_var.size()));
  return out;
}

std::vector<std::span<const double>> DecoderParams::blocks() const {
  auto out = mean.blocks();
  out.emplace_back(log_var.data(), static_cast<std::size_t>(log_var.size()));
  return out;
}

DecoderParams init_decoder(const DecoderArchitecture& arch, std::uint64_t seed, std::uint64_t stream_index) {
  DecoderParams p(arch);
  CounterRng rng(seed, stream_id(StreamKind::kInit, stream_index));
  p.mean = Mlp::glorot(mean_arch(arch), rng);
  return p;
}

Vector decoder_log_density(const DecoderParams& params, const gaussian::SampleBatch& batch) {
  Mlp::Tape tape;
  Matrix mu;
  return decoder_log_density(params, batch, tape, mu);
}

Vector decoder_log_density(const DecoderParams& params, const gaussian::SampleBatch& batch, Mlp::Tape& tape,
                           Matrix& mean_out) {
  require(static_cast<Eigen::Index>(batch.dim()) == params.log_var.size(), "decoder: batch dimension mismatch");
  mean_out = params.mean.forward(Matrix(batch.ys), tape);
  const Eigen::Index n = batch.xs.rows();
  const Eigen::Index d = batch.xs.cols();
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double r = batch.xs(i, k) - mean_out(i, k);
      acc += -0.5 * (log_2pi + params.log_var(k)) - 0.5 * r * r * std::exp(-params.log_var(k));
    }
    out(i) = acc;
  }
  return out;
}

DecoderParams backward(const DecoderParams& params, const gaussian::SampleBatch& batch, const Mlp::Tape& tape,
                       const Matrix& mean_out, const Vector& upstream) {
  const Eigen::Index n = batch.xs.rows();
  const Eigen::Index d = batch.xs.cols();
  require(upstream.size() == n, "decoder backward: one upstream value per sample required");
  DecoderParams grads;
  grads.mean = Mlp(params.mean.architecture());
  grads.log_var = Vector::Zero(d);
  Matrix d_mean(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double inv_var = std::exp(-params.log_var(k));
      const double r = batch.xs(i, k) - mean_out(i, k);
      d_mean(i, k) = upstream(i) * r * inv_var;
      grads.log_var(k) += upstream(i) * (-0.5 + 0.5 * r * r * inv_var);
    }
  }
  params.mean.backward(tape, d_mean, grads.mean);
  return grads;
}

}  // namespace mitk::nn
