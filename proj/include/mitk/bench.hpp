#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mitk/estimators.hpp"
#include "mitk/settings.hpp"
#include "mitk/training.hpp"

namespace mitk::bench {

using estimators::EstimatorKind;

struct BenchConfig {
  std::size_t dim = 20;
  double target_mi = 2.0;
  std::optional<double> rho;  // overrides target_mi when set
  std::vector<EstimatorKind> estimators;
  std::uint64_t master_seed = 0;
  std::size_t seeds = 1;
  std::size_t workers = 0;  // 0: one per available core
  std::filesystem::path out_dir = "mitk_out";
  training::TrainConfig train;

  [[nodiscard]] gaussian::GaussianTask task() const;
  // MI label used in file names: the requested target, or the true MI when rho is given.
  [[nodiscard]] std::string mi_label() const;
};

// Default settings, with the seed taken from MITK_SEED when set.
Settings default_settings();
// Validates and converts; throws ConfigError.
BenchConfig resolve(const Settings& settings);

// `<estimator>_<dim>_<mi>_<seed>.csv`.
std::string trajectory_file_name(const BenchConfig& config, EstimatorKind kind, std::uint64_t seed);
// Header plus one row per record; reals with 9 significant digits.
void write_trajectory_csv(std::ostream& out, const training::EstimateTrajectory& trajectory);
void write_trajectory_csv(const std::filesystem::path& path, const training::EstimateTrajectory& trajectory);
void write_text(const std::filesystem::path& path, const std::string& text);

struct RunOutcome {
  EstimatorKind estimator;
  std::uint64_t seed;
  std::optional<training::EstimateTrajectory> trajectory;
  std::string error;  // set when the run aborted

  [[nodiscard]] bool ok() const { return trajectory.has_value(); }
  // Last smoothed estimate.
  [[nodiscard]] double final_estimate() const;
};

struct SummaryRow {
  std::string estimator;
  double true_mi = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double std_dev = 0.0;  // across seeds; 0 with fewer than two runs
  std::size_t runs = 0;
  bool violation = false;
};

// Runs every (estimator, seed) pair over a pool of config.workers threads.
std::vector<RunOutcome> run_all(const BenchConfig& config);
// One row per estimator, sorted by tag. Failed runs are left out.
std::vector<SummaryRow> summarize(const BenchConfig& config, const std::vector<RunOutcome>& outcomes);
// True when the bound direction fails by more than 3 standard errors of the mean.
bool direction_violated(EstimatorKind kind, double true_mi, double mean, double std_dev, std::size_t runs);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void print_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows);

// Writes all CSVs, summary.csv and config.txt under config.out_dir, prints the
// summary table to `out` and failed runs to `log`. Returns the number of
// aborted runs.
std::size_t run_bench(const BenchConfig& config, const Settings& resolved, std::ostream& out, std::ostream& log);

}  // namespace mitk::bench
