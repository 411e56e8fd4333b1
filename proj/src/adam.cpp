#include "mitk/adam.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace mitk::nn {

AdamState::AdamState(AdamConfig config, const std::vector<std::span<const double>>& shapes) : config_(config) {
  require(config.lr > 0.0 && config.eps > 0.0, "AdamState: lr and eps must be positive");
  require(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0,
          "AdamState: decay rates must lie in [0, 1)");
  for (const auto& block : shapes) {
    m_.emplace_back(block.size(), 0.0);
    v_.emplace_back(block.size(), 0.0);
  }
}

void AdamState::apply(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads) {
  require(params.size() == m_.size() && grads.size() == m_.size(), "adam_step: block count mismatch");
  for (std::size_t b = 0; b < m_.size(); ++b)
    require(params[b].size() == m_[b].size() && grads[b].size() == m_[b].size(), "adam_step: block shape mismatch");

  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = config_.lr;
  const double eps = config_.eps;
  for (std::size_t b = 0; b < m_.size(); ++b) {
    const auto n = static_cast<Eigen::Index>(m_[b].size());
    Eigen::Map<Eigen::ArrayXd> m(m_[b].data(), n);
    Eigen::Map<Eigen::ArrayXd> v(v_[b].data(), n);
    Eigen::Map<const Eigen::ArrayXd> g(grads[b].data(), n);
    Eigen::Map<Eigen::ArrayXd> p(params[b].data(), n);
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    p -= lr * (m / c1) / ((v / c2).sqrt() + eps);
  }
}

}  // namespace mitk::nn
