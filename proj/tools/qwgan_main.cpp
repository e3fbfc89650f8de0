#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qwgan/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"quantum Wasserstein GAN experiment runner"};
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool long_runs = false;
  int workers = 1;
  app.add_option("--config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "override the base seed from the config");
  CLI::Option* out_opt =
      app.add_option("--out", out_dir, "override the output directory");
  app.add_flag("--long", long_runs, "allow configurations marked as long runs");
  app.add_option("--workers", workers, "worker threads across repeated seeds")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    qwgan::ExperimentConfig cfg = qwgan::parse_config_file(config_path);
    qwgan::RunOptions opt;
    if (seed_opt->count() > 0) opt.seed_override = seed;
    if (out_opt->count() > 0) opt.out_override = out_dir;
    opt.long_runs = long_runs;
    opt.workers = workers;
    return qwgan::run_experiment(cfg, opt);
  } catch (const qwgan::usage_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
