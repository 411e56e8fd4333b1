#include "mitk/critic.hpp"

#include "mitk/error.hpp"

namespace mitk::nn {
namespace {

Architecture joint_arch(const CriticArchitecture& a) { return Architecture{2 * a.dim, a.widths, 1}; }
Architecture tower_arch(const CriticArchitecture& a) { return Architecture{a.dim, a.widths, a.embed}; }

void check_batch(const CriticParams& params, const SampleBatch& batch) {
  require(batch.dim() == params.architecture().dim, "critic: batch dimension differs from the critic input");
  require(batch.xs.rows() == batch.ys.rows(), "critic: xs and ys have different row counts");
}

// [x_i, y_j] for all j.
Matrix pair_inputs(const SampleBatch& batch, Eigen::Index i) {
  const Eigen::Index n = batch.ys.rows();
  const Eigen::Index d = batch.ys.cols();
  Matrix in(n, 2 * d);
  in.leftCols(d) = batch.xs.row(i).replicate(n, 1);
  in.rightCols(d) = batch.ys;
  return in;
}

}  // namespace

CriticParams::CriticParams(const CriticArchitecture& arch) : arch_(arch) {
  require(arch.dim > 0, "CriticParams: input dimension must be positive");
  if (arch.form == CriticForm::kJoint) {
    joint = Mlp(joint_arch(arch));
  } else {
    require(arch.embed > 0, "CriticParams: embedding width must be positive");
    x_tower = Mlp(tower_arch(arch));
    y_tower = Mlp(tower_arch(arch));
  }
}

std::vector<std::span<double>> CriticParams::blocks() {
  if (form() == CriticForm::kJoint) return joint.blocks();
  auto out = x_tower.blocks();
  auto more = y_tower.blocks();
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

std::vector<std::span<const double>> CriticParams::blocks() const {
  if (form() == CriticForm::kJoint) return joint.blocks();
  auto out = x_tower.blocks();
  auto more = y_tower.blocks();
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

bool CriticParams::all_finite() const {
  return form() == CriticForm::kJoint ? joint.all_finite() : x_tower.all_finite() && y_tower.all_finite();
}

bool operator==(const CriticParams& a, const CriticParams& b) {
  return a.form() == b.form() && a.joint == b.joint && a.x_tower == b.x_tower && a.y_tower == b.y_tower;
}

CriticParams init_critic(const CriticArchitecture& arch, std::uint64_t seed, std::uint64_t stream_index) {
  CriticParams params(arch);
  CounterRng rng(seed, stream_id(StreamKind::kInit, stream_index));
  if (arch.form == CriticForm::kJoint) {
    params.joint = Mlp::glorot(joint_arch(arch), rng);
  } else {
    params.x_tower = Mlp::glorot(tower_arch(arch), rng);
    params.y_tower = Mlp::glorot(tower_arch(arch), rng);
  }
  return params;
}

RowMatrix score_matrix(const CriticParams& params, const SampleBatch& batch, Execution ex) {
  CriticTape tape;
  return score_matrix(params, batch, tape, ex);
}

RowMatrix score_matrix(const CriticParams& params, const SampleBatch& batch, CriticTape& tape, Execution ex) {
  check_batch(params, batch);
  const Eigen::Index n = batch.xs.rows();
  if (params.form() == CriticForm::kSeparable) {
    tape.h = params.x_tower.forward(Matrix(batch.xs), tape.x_tape);
    tape.u = params.y_tower.forward(Matrix(batch.ys), tape.y_tape);
    return tape.h * tape.u.transpose();
  }
  RowMatrix s(n, n);
  auto row = [&](Eigen::Index i) { s.row(i) = params.joint.forward(pair_inputs(batch, i)).col(0).transpose(); };
  if (ex == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) row(i);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) row(i);
  }
  return s;
}

CriticParams backward(const CriticParams& params, const SampleBatch& batch, const RowMatrix& upstream) {
  check_batch(params, batch);
  const Eigen::Index n = batch.xs.rows();
  require(upstream.rows() == n && upstream.cols() == n, "critic backward: upstream must be n x n");
  if (params.form() == CriticForm::kSeparable) {
    CriticTape tape;
    score_matrix(params, batch, tape, Execution::kSerial);
    return backward(params, tape, upstream);
  }
  CriticParams grads(params.architecture());
  for (Eigen::Index i = 0; i < n; ++i) {
    Mlp::Tape tape;
    params.joint.forward(pair_inputs(batch, i), tape);
    params.joint.backward(tape, upstream.row(i).transpose(), grads.joint);
  }
  return grads;
}

CriticParams backward(const CriticParams& params, const CriticTape& tape, const RowMatrix& upstream) {
  require(params.form() == CriticForm::kSeparable, "critic backward: tape path is for separable critics");
  require(upstream.rows() == tape.h.rows() && upstream.cols() == tape.u.rows(),
          "critic backward: upstream must be n x n");
  CriticParams grads(params.architecture());
  const Matrix g = upstream;
  params.x_tower.backward(tape.x_tape, g * tape.u, grads.x_tower);
  params.y_tower.backward(tape.y_tape, g.transpose() * tape.h, grads.y_tower);
  return grads;
}

// ---- baseline ---------------------------------------------------------------------

BaselineParams::BaselineParams(const BaselineArchitecture& arch) : net(Architecture{arch.dim, arch.widths, 1}) {}

BaselineParams BaselineParams::constant(std::size_t dim, double log_a) {
  BaselineParams p(BaselineArchitecture{dim, {}});
  p.net.layers().back().b(0) = log_a;
  return p;
}

BaselineParams init_baseline(const BaselineArchitecture& arch, std::uint64_t seed, std::uint64_t stream_index) {
  BaselineParams p(arch);
  CounterRng rng(seed, stream_id(StreamKind::kInit, stream_index));
  p.net = Mlp::glorot(Architecture{arch.dim, arch.widths, 1}, rng);
  return p;
}

Vector log_baseline(const BaselineParams& params, const RowMatrix& ys) {
  Mlp::Tape tape;
  return log_baseline(params, ys, tape);
}

Vector log_baseline(const BaselineParams& params, const RowMatrix& ys, Mlp::Tape& tape) {
  return params.net.forward(Matrix(ys), tape).col(0);
}

BaselineParams backward(const BaselineParams& params, const Mlp::Tape& tape, const Vector& upstream) {
  BaselineParams grads;
  grads.net = Mlp(params.net.architecture());
  params.net.backward(tape, upstream, grads.net);
  return grads;
}

}  // namespace mitk::nn
