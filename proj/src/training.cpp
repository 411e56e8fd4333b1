#include "mitk/training.hpp"

#include <cmath>
#include <sstream>

#include "mitk/error.hpp"

namespace mitk::training {
namespace {

using estimators::BoundGradient;

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string snapshot_text(const ConfigSnapshot& config) {
  std::string s;
  for (const auto& [k, v] : config) s += " " + k + "=" + v;
  return s;
}

nn::CriticArchitecture critic_arch(const GaussianTask& task, const TrainConfig& config) {
  nn::CriticArchitecture arch = config.critic;
  arch.dim = task.dim();
  return arch;
}

template <typename Params>
void negate(Params& grads) {
  for (auto block : grads.blocks())
    for (double& g : block) g = -g;
}

// One ascent step on a critic bound; returns the training-batch value.
double critic_step(EstimatorKind kind, TrainedModel& model, nn::AdamState& critic_opt, nn::AdamState* baseline_opt,
                   const gaussian::SampleBatch& batch, Execution ex) {
  auto& critic = *model.critic;
  nn::CriticTape tape;
  const gaussian::RowMatrix s = nn::score_matrix(critic, batch, tape, ex);
  BoundGradient g;
  nn::Mlp::Tape baseline_tape;
  switch (kind) {
    case EstimatorKind::kDv: g = estimators::dv_gradient(s, ex); break;
    case EstimatorKind::kNwj: g = estimators::nwj_gradient(s, ex); break;
    case EstimatorKind::kInfoNce: g = estimators::infonce_gradient(s, ex); break;
    case EstimatorKind::kTuba:
      g = estimators::tuba_gradient(s, nn::log_baseline(*model.baseline, batch.ys, baseline_tape), ex);
      break;
    default: throw ContractViolation("critic_step: not a critic bound");
  }
  if (!std::isfinite(g.value)) return g.value;

  nn::CriticParams grads = critic.form() == nn::CriticForm::kSeparable ? nn::backward(critic, tape, g.d_scores)
                                                                       : nn::backward(critic, batch, g.d_scores);
  negate(grads);
  nn::adam_step(critic_opt, critic, grads);
  if (kind == EstimatorKind::kTuba) {
    nn::BaselineParams bgrads = nn::backward(*model.baseline, baseline_tape, g.d_log_a);
    negate(bgrads);
    nn::adam_step(*baseline_opt, *model.baseline, bgrads);
  }
  return g.value;
}

double decoder_step(TrainedModel& model, nn::AdamState& opt, const gaussian::SampleBatch& batch, double hx) {
  auto& decoder = *model.decoder;
  nn::Mlp::Tape tape;
  nn::Matrix mean;
  const Eigen::VectorXd lq = nn::decoder_log_density(decoder, batch, tape, mean);
  const double value = lq.mean() + hx;
  if (!std::isfinite(value)) return value;
  // Ascend the mean log-density: upstream -1/n for minimization.
  const Eigen::VectorXd upstream = Eigen::VectorXd::Constant(lq.size(), -1.0 / static_cast<double>(lq.size()));
  nn::DecoderParams grads = nn::backward(decoder, batch, tape, mean, upstream);
  nn::adam_step(opt, decoder, grads);
  return value;
}

bool model_finite(const TrainedModel& m) {
  return (!m.critic || m.critic->all_finite()) && (!m.baseline || m.baseline->all_finite()) &&
         (!m.decoder || m.decoder->all_finite());
}

}  // namespace

TrainingAborted::TrainingAborted(std::size_t step, const std::string& what, ConfigSnapshot config)
    : std::runtime_error("training aborted at step " + std::to_string(step) + ": " + what + ";" +
                         snapshot_text(config)),
      step_(step),
      config_(std::move(config)) {}

ConfigSnapshot describe(EstimatorKind kind, const GaussianTask& task, const TrainConfig& config) {
  ConfigSnapshot c{
      {"estimator", std::string(estimators::tag(kind))},
      {"dim", std::to_string(task.dim())},
      {"rho", num(task.rho())},
      {"true_mi", num(gaussian::true_mi(task))},
      {"steps", std::to_string(config.steps)},
      {"batch", std::to_string(config.batch_size)},
      {"seed", std::to_string(config.seed)},
      {"eval.interval", std::to_string(config.eval_interval)},
  };
  if (estimators::uses_critic(kind)) {
    c.emplace_back("critic.form", config.critic.form == nn::CriticForm::kJoint ? "joint" : "separable");
    c.emplace_back("critic.widths", join(config.critic.widths));
    c.emplace_back("critic.embed", std::to_string(config.critic.embed));
  }
  if (estimators::uses_baseline(kind)) c.emplace_back("baseline.widths", join(config.baseline_widths));
  if (estimators::uses_decoder(kind)) c.emplace_back("decoder.widths", join(config.decoder_widths));
  if (estimators::is_trainable(kind)) {
    c.emplace_back("adam.lr", num(config.adam.lr));
    c.emplace_back("adam.beta1", num(config.adam.beta1));
    c.emplace_back("adam.beta2", num(config.adam.beta2));
    c.emplace_back("adam.eps", num(config.adam.eps));
  }
  return c;
}

TrainedModel init_model(EstimatorKind kind, const GaussianTask& task, const TrainConfig& config) {
  TrainedModel m;
  if (estimators::uses_critic(kind)) m.critic = nn::init_critic(critic_arch(task, config), config.seed, 0);
  if (estimators::uses_baseline(kind))
    m.baseline = nn::init_baseline(nn::BaselineArchitecture{task.dim(), config.baseline_widths}, config.seed, 1);
  if (estimators::uses_decoder(kind))
    m.decoder = nn::init_decoder(nn::DecoderArchitecture{task.dim(), config.decoder_widths}, config.seed, 2);
  return m;
}

double evaluate(EstimatorKind kind, const GaussianTask& task, const TrainedModel& model,
                const gaussian::SampleBatch& batch, Execution ex) {
  switch (kind) {
    case EstimatorKind::kBaUpper: return estimators::est_ba_upper(task, batch);
    case EstimatorKind::kL1Out: return estimators::est_l1out(task, batch, ex);
    case EstimatorKind::kBaLower:
      require(model.decoder.has_value(), "evaluate: ba_lower needs a decoder");
      return estimators::est_ba_lower(batch, *model.decoder, gaussian::marginal_entropy(task));
    default: break;
  }
  require(model.critic.has_value(), "evaluate: critic bounds need a critic");
  const gaussian::RowMatrix s = nn::score_matrix(*model.critic, batch, ex);
  switch (kind) {
    case EstimatorKind::kDv: return estimators::est_dv(s, ex);
    case EstimatorKind::kNwj: return estimators::est_nwj(s, ex);
    case EstimatorKind::kInfoNce: return estimators::est_infonce(s, ex);
    case EstimatorKind::kTuba:
      require(model.baseline.has_value(), "evaluate: tuba needs a baseline");
      return estimators::est_tuba(s, nn::log_baseline(*model.baseline, batch.ys), ex);
    default: break;
  }
  throw ContractViolation("evaluate: unknown estimator");
}

std::vector<double> evaluate_many(EstimatorKind kind, const GaussianTask& task, const TrainedModel& model,
                                  std::size_t count, std::size_t batch_size, std::uint64_t seed, StreamKind stream,
                                  Execution ex) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = evaluate(kind, task, model, gaussian::sample(task, batch_size, seed, stream_id(stream, k)), ex);
  return out;
}

TrainResult train_estimator(EstimatorKind kind, const GaussianTask& task, const TrainConfig& config) {
  require(config.batch_size >= 2, "train_estimator: batch size must be >= 2");
  require(config.eval_interval >= 1, "train_estimator: eval interval must be >= 1");
  require(config.ema >= 0.0 && config.ema < 1.0, "train_estimator: EMA factor must lie in [0, 1)");
  const ConfigSnapshot snapshot = describe(kind, task, config);

  TrainResult result;
  result.model = init_model(kind, task, config);
  auto& traj = result.trajectory;
  traj.estimator = std::string(estimators::tag(kind));
  traj.seed = config.seed;
  traj.true_mi = gaussian::true_mi(task);
  traj.config = snapshot;

  auto record = [&](std::size_t step) {
    const auto batch = gaussian::sample(task, config.batch_size, config.seed,
                                        stream_id(StreamKind::kEvalBatch, traj.records.size()));
    const double estimate = evaluate(kind, task, result.model, batch, config.execution);
    if (!std::isfinite(estimate)) throw TrainingAborted(step, "non-finite evaluation estimate", snapshot);
    const double smoothed =
        traj.records.empty() ? estimate : config.ema * traj.records.back().smoothed + (1.0 - config.ema) * estimate;
    traj.records.push_back(TrajectoryRecord{step, estimate, smoothed});
  };

  record(0);
  if (!estimators::is_trainable(kind)) {
    for (std::size_t step = config.eval_interval; step <= config.steps; step += config.eval_interval) record(step);
    if (config.steps % config.eval_interval != 0) record(config.steps);
    return result;
  }

  std::optional<nn::AdamState> main_opt;
  std::optional<nn::AdamState> baseline_opt;
  if (result.model.critic) main_opt = nn::AdamState::for_params(*result.model.critic, config.adam);
  if (result.model.decoder) main_opt = nn::AdamState::for_params(*result.model.decoder, config.adam);
  if (result.model.baseline) baseline_opt = nn::AdamState::for_params(*result.model.baseline, config.adam);
  const double hx = gaussian::marginal_entropy(task);

  for (std::size_t step = 1; step <= config.steps; ++step) {
    const auto batch = gaussian::sample(task, config.batch_size, config.seed, stream_id(StreamKind::kTrainBatch, step));
    const double value = estimators::uses_decoder(kind)
                             ? decoder_step(result.model, *main_opt, batch, hx)
                             : critic_step(kind, result.model, *main_opt, baseline_opt ? &*baseline_opt : nullptr, batch,
                                           config.execution);
    if (!std::isfinite(value)) throw TrainingAborted(step, "non-finite training objective", snapshot);
    if (!model_finite(result.model)) throw TrainingAborted(step, "non-finite parameters", snapshot);
    if (step % config.eval_interval == 0 || step == config.steps) record(step);
  }
  return result;
}

}  // namespace mitk::training
