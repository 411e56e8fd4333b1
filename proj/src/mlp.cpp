#include "mitk/mlp.hpp"

#include <atomic>
#include <cmath>

#include "mitk/error.hpp"

namespace mitk::nn {
namespace {

std::atomic<std::uint64_t> g_rows_forwarded{0};

std::vector<std::size_t> widths_of(const Architecture& arch) {
  std::vector<std::size_t> w{arch.input};
  w.insert(w.end(), arch.hidden.begin(), arch.hidden.end());
  w.push_back(arch.output);
  return w;
}

}  // namespace

void check_architecture(const Architecture& arch) {
  for (std::size_t w : widths_of(arch)) require(w > 0, "Mlp: layer widths must be positive");
}

Mlp::Mlp(const Architecture& arch) : arch_(arch) {
  check_architecture(arch);
  const auto w = widths_of(arch);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    layers_.push_back(DenseLayer{Matrix::Zero(static_cast<Eigen::Index>(w[k + 1]), static_cast<Eigen::Index>(w[k])),
                                 Vector::Zero(static_cast<Eigen::Index>(w[k + 1]))});
  }
}

Mlp Mlp::glorot(const Architecture& arch, CounterRng& rng) {
  Mlp net(arch);
  for (auto& layer : net.layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.w.rows() + layer.w.cols()));
    for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r) layer.w(r, c) = rng.uniform(-bound, bound);
  }
  return net;
}

Matrix Mlp::forward(const Matrix& x) const {
  Tape scratch;
  return forward(x, scratch);
}

Matrix Mlp::forward(const Matrix& x, Tape& tape) const {
  require(static_cast<std::size_t>(x.cols()) == arch_.input, "Mlp::forward: input width mismatch");
  g_rows_forwarded.fetch_add(static_cast<std::uint64_t>(x.rows()), std::memory_order_relaxed);
  tape.inputs.clear();
  tape.pre.clear();
  Matrix a = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    Matrix z(a.rows(), layer.w.rows());
    z.noalias() = a * layer.w.transpose();
    z.rowwise() += layer.b.transpose();
    tape.inputs.push_back(std::move(a));
    if (k + 1 == layers_.size()) return z;
    a = z.cwiseMax(0.0);
    tape.pre.push_back(std::move(z));
  }
  return a;
}

Matrix Mlp::backward(const Tape& tape, const Matrix& d_out, Mlp& grads) const {
  require(tape.inputs.size() == layers_.size(), "Mlp::backward: tape does not match the network");
  require(grads.layers_.size() == layers_.size(), "Mlp::backward: gradient shape mismatch");
  Matrix delta = d_out;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& layer = layers_[k];
    auto& g = grads.layers_[k];
    require(delta.cols() == layer.w.rows() && delta.rows() == tape.inputs[k].rows(),
            "Mlp::backward: upstream shape mismatch");
    g.w.noalias() += delta.transpose() * tape.inputs[k];
    g.b.noalias() += delta.colwise().sum().transpose();
    Matrix below(delta.rows(), layer.w.cols());
    below.noalias() = delta * layer.w;
    if (k > 0) below.array() *= (tape.pre[k - 1].array() > 0.0).cast<double>();
    delta = std::move(below);
  }
  return delta;
}

std::vector<std::span<double>> Mlp::blocks() {
  std::vector<std::span<double>> out;
  for (auto& layer : layers_) {
    out.emplace_back(layer.w.data(), static_cast<std::size_t>(layer.w.size()));
    out.emplace_back(layer.b.data(), static_cast<std::size_t>(layer.b.size()));
  }
  return out;
}

std::vector<std::span<const double>> Mlp::blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& layer : layers_) {
    out.emplace_back(layer.w.data(), static_cast<std::size_t>(layer.w.size()));
    out.emplace_back(layer.b.data(), static_cast<std::size_t>(layer.b.size()));
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.w.size() + layer.b.size());
  return n;
}

void Mlp::set_zero() {
  for (auto& layer : layers_) {
    layer.w.setZero();
    layer.b.setZero();
  }
}

bool Mlp::all_finite() const {
  for (const auto& layer : layers_)
    if (!layer.w.allFinite() || !layer.b.allFinite()) return false;
  return true;
}

std::uint64_t Mlp::rows_forwarded() { return g_rows_forwarded.load(std::memory_order_relaxed); }

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t k = 0; k < a.layers_.size(); ++k) {
    if (a.layers_[k].w.rows() != b.layers_[k].w.rows() || a.layers_[k].w.cols() != b.layers_[k].w.cols()) return false;
    if (a.layers_[k].w != b.layers_[k].w || a.layers_[k].b != b.layers_[k].b) return false;
  }
  return true;
}

}  // namespace mitk::nn
