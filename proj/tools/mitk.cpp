#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "mitk/bench.hpp"
#include "mitk/discrete.hpp"
#include "mitk/probes.hpp"
#include "mitk/table_io.hpp"

namespace {

using namespace mitk;
using namespace mitk::probes;

// Flags that map one-to-one onto config keys; only flags given on the
// command line are applied, above the config file.
struct FlagLayer {
  std::map<std::string, std::string> values;
  std::string config_file;
  std::vector<std::string> overrides;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option(flag, values[key], help);
  }

  Settings resolve_settings(CLI::App* app) const {
    Settings s = bench::default_settings();
    if (!config_file.empty()) s.load_file(config_file);
    for (const auto& [key, value] : values) {
      const std::string flag = "--" + flag_name(key);
      if (app->count(flag) > 0) s.set(key, value);
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      s.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return s;
  }

  static std::string flag_name(const std::string& key) {
    static const std::map<std::string, std::string> names{
        {"dim", "dim"},       {"target_mi", "target-mi"}, {"rho", "rho"},
        {"steps", "steps"},   {"batch", "batch"},         {"seed", "seed"},
        {"out", "out"},       {"estimators", "estimators"}, {"seeds", "seeds"},
        {"workers", "workers"}, {"critic.form", "critic-form"}, {"critic.widths", "critic-widths"},
        {"critic.embed", "critic-embed"}, {"adam.lr", "lr"}, {"eval.interval", "eval-interval"},
    };
    return names.at(key);
  }
};

void add_run_flags(CLI::App* app, FlagLayer& layer) {
  app->add_option("--config", layer.config_file, "Flat key=value config file")->check(CLI::ExistingFile);
  app->add_option("--set", layer.overrides, "Override any config key (key=value), repeatable");
  layer.add(app, "--dim", "dim", "Dimension of X and Y");
  layer.add(app, "--target-mi", "target_mi", "True MI of the task in nats");
  layer.add(app, "--rho", "rho", "Per-coordinate correlation (overrides --target-mi)");
  layer.add(app, "--steps", "steps", "Training steps");
  layer.add(app, "--batch", "batch", "Batch size K");
  layer.add(app, "--seed", "seed", "Seed (first seed for bench)");
  layer.add(app, "--out", "out", "Output directory");
  layer.add(app, "--critic-form", "critic.form", "joint or separable");
  layer.add(app, "--critic-widths", "critic.widths", "Hidden widths, comma separated");
  layer.add(app, "--critic-embed", "critic.embed", "Embedding width of the separable critic");
  layer.add(app, "--lr", "adam.lr", "Adam step size");
  layer.add(app, "--eval-interval", "eval.interval", "Steps between held-out evaluations");
}

int cmd_verify(std::size_t trials, std::uint64_t seed, bool corrupt, bool serial) {
  if (trials == 0) std::cerr << "warning: --trials 0 runs no checks; every probe passes vacuously\n";
  ProbeOptions options;
  options.trials = trials;
  options.seed = seed;
  options.execution = serial ? Execution::kSerial : Execution::kParallel;
  if (corrupt) {
    options.kl = corrupted_kl_oracle();
    std::cerr << "self-test: KL oracle shifted by 1e-3; failures are expected\n";
  }
  bool ok = true;
  for (const auto& line : run_probe_suite(options)) {
    std::cout << format_probe_line(line) << "\n";
    ok = ok && line.passed();
  }
  std::cout << (ok ? "all probes passed" : "probe failures") << "\n";
  return ok ? 0 : 1;
}

int cmd_train(const Settings& settings, const std::string& estimator) {
  Settings s = settings;
  s.set("estimators", estimator);
  s.set("seeds", "1");
  const auto config = bench::resolve(s);
  if (config.estimators.size() != 1) throw ConfigError("train takes exactly one estimator");
  const auto kind = config.estimators.front();
  auto train = config.train;
  train.seed = config.master_seed;
  std::filesystem::create_directories(config.out_dir);
  bench::write_text(config.out_dir / "config.txt", s.to_text());
  const auto result = training::train_estimator(kind, config.task(), train);
  const auto path = config.out_dir / bench::trajectory_file_name(config, kind, train.seed);
  bench::write_trajectory_csv(path, result.trajectory);
  const auto& last = result.trajectory.records.back();
  std::printf("%s\nfinal step %zu estimate %.6f smoothed %.6f true_mi %.6f\n", path.string().c_str(), last.step,
              last.estimate, last.smoothed, result.trajectory.true_mi);
  return 0;
}

int cmd_table_mi(const std::string& path) {
  const auto table = discrete::read_table_file(path);
  std::printf("I(X;Y) = %.12g nats\n", discrete::mutual_information(table));
  std::printf("H(X,Y) = %.12g nats\n", discrete::joint_entropy(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mitk: mutual information toolkit"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "Run the information-inequality probe suite");
  std::size_t trials = 1000;
  std::uint64_t verify_seed = 0;
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') verify_seed = std::strtoull(env, nullptr, 10);
  bool corrupt = false;
  bool serial = false;
  verify->add_option("--trials", trials, "Random trials per probe");
  verify->add_option("--seed", verify_seed, "Master seed");
  verify->add_flag("--self-test-corrupt", corrupt, "Use a deliberately wrong KL oracle (must fail)");
  verify->add_flag("--serial", serial, "Run trials on one thread");

  auto* train = app.add_subcommand("train", "Train one estimator and write its trajectory CSV");
  FlagLayer train_flags;
  std::string estimator;
  train->add_option("--estimator", estimator, "ba_upper, ba_lower, l1out, dv, tuba, nwj or infonce")->required();
  add_run_flags(train, train_flags);

  auto* bench_cmd = app.add_subcommand("bench", "Train estimators over several seeds and summarize");
  FlagLayer bench_flags;
  add_run_flags(bench_cmd, bench_flags);
  bench_flags.add(bench_cmd, "--estimators", "estimators", "Comma separated estimator list");
  bench_flags.add(bench_cmd, "--seeds", "seeds", "Number of seeds (seed, seed+1, ...)");
  bench_flags.add(bench_cmd, "--workers", "workers", "Concurrent runs (0: all cores)");

  auto* table_mi = app.add_subcommand("table-mi", "Mutual information of a joint table file");
  std::string table_path;
  table_mi->add_option("file", table_path, "Table file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) return cmd_verify(trials, verify_seed, corrupt, serial);
    if (*train) return cmd_train(train_flags.resolve_settings(train), estimator);
    if (*bench_cmd) {
      const Settings s = bench_flags.resolve_settings(bench_cmd);
      const auto config = bench::resolve(s);
      const std::size_t failed = bench::run_bench(config, s, std::cout, std::cerr);
      if (failed > 0) std::cerr << failed << " run(s) aborted\n";
      return failed > 0 ? 1 : 0;
    }
    if (*table_mi) return cmd_table_mi(table_path);
  } catch (const training::TrainingAborted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const discrete::TableFormatError& e) {
    std::cerr << "table error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
