#include "mitk/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

namespace mitk::bench {
namespace {

std::string g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Mean, bias and true MI as printed; bias is the difference of the printed
// values so the columns agree exactly.
struct PrintedRow {
  std::string true_mi;
  std::string mean;
  std::string bias;
  std::string std_dev;
};

PrintedRow printed(const SummaryRow& row) {
  PrintedRow p{fixed6(row.true_mi), fixed6(row.mean_estimate), "", fixed6(row.std_dev)};
  p.bias = fixed6(std::strtod(p.mean.c_str(), nullptr) - std::strtod(p.true_mi.c_str(), nullptr));
  return p;
}

std::string join_widths(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

}  // namespace

gaussian::GaussianTask BenchConfig::task() const {
  return rho ? gaussian::GaussianTask(dim, *rho) : gaussian::GaussianTask::from_target_mi(dim, target_mi);
}

std::string BenchConfig::mi_label() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", rho ? gaussian::true_mi(task()) : target_mi);
  return buf;
}

Settings default_settings() {
  const training::TrainConfig t;
  Settings s;
  s.set("dim", "20");
  s.set("target_mi", "2");
  s.set("estimators", "ba_upper,ba_lower,l1out,dv,tuba,nwj,infonce");
  s.set("steps", std::to_string(t.steps));
  s.set("batch", std::to_string(t.batch_size));
  s.set("seed", "0");
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') s.set("seed", env);
  s.set("seeds", "3");
  s.set("workers", "0");
  s.set("out", "mitk_out");
  s.set("critic.form", "separable");
  s.set("critic.widths", join_widths(t.critic.widths));
  s.set("critic.embed", std::to_string(t.critic.embed));
  s.set("baseline.widths", join_widths(t.baseline_widths));
  s.set("decoder.widths", join_widths(t.decoder_widths));
  s.set("adam.lr", g9(t.adam.lr));
  s.set("adam.beta1", g9(t.adam.beta1));
  s.set("adam.beta2", g9(t.adam.beta2));
  s.set("adam.eps", g9(t.adam.eps));
  s.set("eval.interval", std::to_string(t.eval_interval));
  return s;
}

BenchConfig resolve(const Settings& settings) {
  Settings s = default_settings();
  s.merge(settings);
  auto get = [&](const char* key) { return *s.get(key); };

  BenchConfig c;
  c.dim = parse_count("dim", get("dim"));
  if (c.dim == 0) throw ConfigError("dim: must be >= 1");
  c.target_mi = parse_real("target_mi", get("target_mi"));
  if (c.target_mi < 0.0) throw ConfigError("target_mi: must be >= 0");
  if (auto r = s.get("rho"); r && !r->empty()) {
    c.rho = parse_real("rho", *r);
    if (std::abs(*c.rho) >= 1.0) throw ConfigError("rho: |rho| must be < 1");
  }
  for (const auto& name : parse_list(get("estimators"))) {
    const auto kind = estimators::parse_estimator(name);
    if (!kind) throw ConfigError("estimators: unknown estimator '" + name + "'");
    if (std::find(c.estimators.begin(), c.estimators.end(), *kind) == c.estimators.end()) c.estimators.push_back(*kind);
  }
  if (c.estimators.empty()) throw ConfigError("estimators: list is empty");
  c.master_seed = parse_count("seed", get("seed"));
  c.seeds = parse_count("seeds", get("seeds"));
  if (c.seeds == 0) throw ConfigError("seeds: need at least one seed");
  c.workers = parse_count("workers", get("workers"));
  c.out_dir = get("out");

  auto& t = c.train;
  t.steps = parse_count("steps", get("steps"));
  t.batch_size = parse_count("batch", get("batch"));
  if (t.batch_size < 2) throw ConfigError("batch: must be >= 2");
  const std::string form = get("critic.form");
  if (form == "joint") {
    t.critic.form = nn::CriticForm::kJoint;
  } else if (form == "separable") {
    t.critic.form = nn::CriticForm::kSeparable;
  } else {
    throw ConfigError("critic.form: expected 'joint' or 'separable', got '" + form + "'");
  }
  t.critic.dim = c.dim;
  t.critic.widths = parse_widths("critic.widths", get("critic.widths"));
  t.critic.embed = parse_count("critic.embed", get("critic.embed"));
  if (t.critic.embed == 0) throw ConfigError("critic.embed: must be positive");
  t.baseline_widths = parse_widths("baseline.widths", get("baseline.widths"));
  t.decoder_widths = parse_widths("decoder.widths", get("decoder.widths"));
  t.adam.lr = parse_real("adam.lr", get("adam.lr"));
  t.adam.beta1 = parse_real("adam.beta1", get("adam.beta1"));
  t.adam.beta2 = parse_real("adam.beta2", get("adam.beta2"));
  t.adam.eps = parse_real("adam.eps", get("adam.eps"));
  if (!(t.adam.lr > 0.0 && t.adam.eps > 0.0)) throw ConfigError("adam: lr and eps must be positive");
  if (!(t.adam.beta1 >= 0.0 && t.adam.beta1 < 1.0 && t.adam.beta2 >= 0.0 && t.adam.beta2 < 1.0))
    throw ConfigError("adam: beta1 and beta2 must lie in [0, 1)");
  t.eval_interval = parse_count("eval.interval", get("eval.interval"));
  if (t.eval_interval == 0) throw ConfigError("eval.interval: must be >= 1");
  return c;
}

std::string trajectory_file_name(const BenchConfig& config, EstimatorKind kind, std::uint64_t seed) {
  return std::string(estimators::tag(kind)) + "_" + std::to_string(config.dim) + "_" + config.mi_label() + "_" +
         std::to_string(seed) + ".csv";
}

void write_trajectory_csv(std::ostream& out, const training::EstimateTrajectory& trajectory) {
  out << "step,estimate,smoothed,true_mi,estimator,seed\n";
  const std::string tail = "," + g9(trajectory.true_mi) + "," + trajectory.estimator + "," + std::to_string(trajectory.seed);
  for (const auto& r : trajectory.records)
    out << r.step << "," << g9(r.estimate) << "," << g9(r.smoothed) << tail << "\n";
}

void write_trajectory_csv(const std::filesystem::path& path, const training::EstimateTrajectory& trajectory) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trajectory_csv(out, trajectory);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

double RunOutcome::final_estimate() const { return trajectory->records.back().smoothed; }

std::vector<RunOutcome> run_all(const BenchConfig& config) {
  const auto task = config.task();
  std::vector<RunOutcome> outcomes;
  for (auto kind : config.estimators)
    for (std::size_t k = 0; k < config.seeds; ++k) outcomes.push_back(RunOutcome{kind, config.master_seed + k, {}, {}});

  const int workers = config.workers > 0 ? static_cast<int>(config.workers) : omp_get_num_procs();
  const auto n = static_cast<std::ptrdiff_t>(outcomes.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    auto& o = outcomes[static_cast<std::size_t>(r)];
    training::TrainConfig train = config.train;
    train.seed = o.seed;
    try {
      o.trajectory = training::train_estimator(o.estimator, task, train).trajectory;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  }
  return outcomes;
}

bool direction_violated(EstimatorKind kind, double true_mi, double mean, double std_dev, std::size_t runs) {
  if (runs < 2) return false;
  const double se = std_dev / std::sqrt(static_cast<double>(runs));
  return estimators::direction(kind) == estimators::BoundDirection::kLower ? mean > true_mi + 3.0 * se
                                                                           : mean < true_mi - 3.0 * se;
}

std::vector<SummaryRow> summarize(const BenchConfig& config, const std::vector<RunOutcome>& outcomes) {
  const double true_mi = gaussian::true_mi(config.task());
  std::map<std::string, std::pair<EstimatorKind, std::vector<double>>> groups;
  for (const auto& o : outcomes) {
    auto& g = groups.try_emplace(std::string(estimators::tag(o.estimator)), o.estimator, std::vector<double>{}).first->second;
    if (o.ok()) g.second.push_back(o.final_estimate());
  }
  std::vector<SummaryRow> rows;
  for (const auto& [tag, group] : groups) {
    const auto& v = group.second;
    SummaryRow row;
    row.estimator = tag;
    row.true_mi = true_mi;
    row.runs = v.size();
    if (v.empty()) {
      row.mean_estimate = row.bias = std::nan("");
    } else {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      row.mean_estimate = m;
      row.bias = m - true_mi;
      row.std_dev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      row.violation = direction_violated(group.first, true_mi, m, row.std_dev, v.size());
    }
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "estimator,true_mi,mean_estimate,bias,std,violation\n";
  for (const auto& row : rows) {
    const auto p = printed(row);
    out << row.estimator << "," << p.true_mi << "," << p.mean << "," << p.bias << "," << p.std_dev << ","
        << (row.violation ? "true" : "false") << "\n";
  }
}

void print_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows) {
  const std::vector<std::string> head{"estimator", "true_mi", "mean", "bias", "std", "runs", "violation"};
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& row : rows) {
    const auto p = printed(row);
    cells.push_back({row.estimator, p.true_mi, p.mean, p.bias, p.std_dev, std::to_string(row.runs),
                     row.violation ? "yes" : "no"});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << line[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << line[c];
      }
    }
    out << "\n";
  }
}

std::size_t run_bench(const BenchConfig& config, const Settings& resolved, std::ostream& out, std::ostream& log) {
  std::filesystem::create_directories(config.out_dir);
  write_text(config.out_dir / "config.txt", resolved.to_text());
  const auto outcomes = run_all(config);
  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    if (o.ok()) {
      write_trajectory_csv(config.out_dir / trajectory_file_name(config, o.estimator, o.seed), *o.trajectory);
    } else {
      ++failures;
      log << "run " << estimators::tag(o.estimator) << " seed " << o.seed << " failed: " << o.error << "\n";
    }
  }
  const auto rows = summarize(config, outcomes);
  std::ofstream summary(config.out_dir / "summary.csv", std::ios::binary);
  if (!summary) throw std::runtime_error("cannot write " + (config.out_dir / "summary.csv").string());
  write_summary_csv(summary, rows);
  print_summary_table(out, rows);
  return failures;
}

}  // namespace mitk::bench
