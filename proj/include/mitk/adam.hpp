#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mitk/error.hpp"

// Bias-corrected Adam over any parameter pack exposing blocks(): a list of
// contiguous spans. Gradients are for minimization.
namespace mitk::nn {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamConfig config, const std::vector<std::span<const double>>& shapes);

  template <typename Params>
  static AdamState for_params(const Params& params, AdamConfig config = {}) {
    return AdamState(config, params.blocks());
  }

  [[nodiscard]] const AdamConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t step() const noexcept { return step_; }
  [[nodiscard]] const std::vector<std::vector<double>>& first_moment() const noexcept { return m_; }
  [[nodiscard]] const std::vector<std::vector<double>>& second_moment() const noexcept { return v_; }

  // One update of params in place.
  void apply(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads);

 private:
  AdamConfig config_;
  std::size_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

template <typename Params>
void adam_step(AdamState& state, Params& params, const Params& grads) {
  state.apply(params.blocks(), grads.blocks());
}

// Single flat parameter vector, for tests and scalar problems.
struct FlatParams {
  std::vector<double> values;
  [[nodiscard]] std::vector<std::span<double>> blocks() { return {std::span<double>(values)}; }
  [[nodiscard]] std::vector<std::span<const double>> blocks() const { return {std::span<const double>(values)}; }
};

}  // namespace mitk::nn
