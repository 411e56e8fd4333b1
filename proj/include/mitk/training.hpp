#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mitk/adam.hpp"
#include "mitk/critic.hpp"
#include "mitk/decoder.hpp"
#include "mitk/estimators.hpp"
#include "mitk/execution.hpp"
#include "mitk/gaussian.hpp"
#include "mitk/rng.hpp"

namespace mitk::training {

using estimators::EstimatorKind;
using gaussian::GaussianTask;

struct TrainConfig {
  std::size_t steps = 20000;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  // The input dimension is taken from the task.
  nn::CriticArchitecture critic;
  std::vector<std::size_t> baseline_widths{64, 64};
  std::vector<std::size_t> decoder_widths{256, 256};
  nn::AdamConfig adam;
  std::size_t eval_interval = 100;
  double ema = 0.9;
  Execution execution = Execution::kParallel;
};

using ConfigSnapshot = std::vector<std::pair<std::string, std::string>>;

ConfigSnapshot describe(EstimatorKind kind, const GaussianTask& task, const TrainConfig& config);

struct TrajectoryRecord {
  std::size_t step;
  double estimate;
  double smoothed;
};

struct EstimateTrajectory {
  std::vector<TrajectoryRecord> records;
  std::string estimator;
  std::uint64_t seed = 0;
  double true_mi = 0.0;
  ConfigSnapshot config;
};

// Whatever the estimator learns; unused members stay empty.
struct TrainedModel {
  std::optional<nn::CriticParams> critic;
  std::optional<nn::BaselineParams> baseline;
  std::optional<nn::DecoderParams> decoder;
};

struct TrainResult {
  EstimateTrajectory trajectory;
  TrainedModel model;
};

class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(std::size_t step, const std::string& what, ConfigSnapshot config);
  [[nodiscard]] std::size_t step() const noexcept { return step_; }
  [[nodiscard]] const ConfigSnapshot& config() const noexcept { return config_; }

 private:
  std::size_t step_;
  ConfigSnapshot config_;
};

// Initial parameters for the components the estimator uses.
TrainedModel init_model(EstimatorKind kind, const GaussianTask& task, const TrainConfig& config);

// Estimate of `kind` on one batch with the given components.
double evaluate(EstimatorKind kind, const GaussianTask& task, const TrainedModel& model,
                const gaussian::SampleBatch& batch, Execution ex = Execution::kParallel);

// Estimates on `count` fresh batches drawn from streams (kind, 0..count-1).
std::vector<double> evaluate_many(EstimatorKind kind, const GaussianTask& task, const TrainedModel& model,
                                  std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                  StreamKind stream = StreamKind::kFinalEval, Execution ex = Execution::kParallel);

// Trains lower bounds by ascent with Adam on batches from (seed, kTrainBatch,
// step). Every eval_interval steps, and at step 0 and the last step, records
// the estimate on a held-out batch from (seed, kEvalBatch, record index) and
// its exponential moving average. I_R and L1Out have nothing to learn and only
// record evaluations. Throws TrainingAborted on a non-finite value.
TrainResult train_estimator(EstimatorKind kind, const GaussianTask& task, const TrainConfig& config);

}  // namespace mitk::training
