#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwgan/hamsim.hpp"

namespace qwgan {

// Configuration / command-line misuse; maps to exit status 1.
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string command;
  int qubits = 1;
  std::string layout_name;  // defaulted per command
  int depth = -1;
  int rank = -1;         // generator mixture rank
  int target_rank = -1;  // sampled target rank
  double lambda = -1.0;
  double eta = -1.0;
  double eta_angles = -1.0;
  double eta_logits = -1.0;
  double eta_disc = -1.0;
  int epochs = -1;
  int repeats = -1;
  int disc_steps = 1;
  std::string reg;  // exact | relaxed | decomposed, defaulted by register size
  int taylor_order = 8;
  std::string disc_method;  // frechet | commuting; empty = per-command default
  int disc_cap = -1;                    // max string weight, -1 = full basis
  double stop_fidelity = 0.0;
  double sigma = -1.0;
  bool noisy_gradients = true;
  std::uint64_t target_seed = 12345;
  std::uint64_t base_seed = 1;
  // compress-circuit
  std::string target_kind = "heisenberg";  // heisenberg | rotation
  double time = 1.0;
  double error_budget = 1e-3;
  int order_k = 1;
  double coupling = 1.0;
  double field = 1.0;
  std::uint64_t ham_seed = 7;
  // qw-eval
  std::string state_a;
  std::string state_b;
  std::vector<double> lambdas{1.0, 0.1, 0.01};

  std::string out_dir = "out";
};

// Structured text: one `[command]` section of `key = value` lines, `#`
// comments.  Unknown keys, malformed lines, and type mismatches raise
// usage_error naming the line; defaults are filled afterwards.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::string& path);

struct LoadedState {
  DensityMatrix state;
  std::optional<PureState> pure;
};

// Text format: header `pure <qubits>` or `mixed <qubits>`, then one `re im`
// pair per line (2^n amplitudes, or 4^n row-major matrix entries).
LoadedState read_state_file(const std::string& path);
void write_state_file(const std::string& path, const DensityMatrix& rho);
void write_state_file(const std::string& path, const PureState& psi);

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  bool long_runs = false;
  int workers = 1;
};

// Returns the process exit status: 0 success, 3 failed gradient check.
// Throws usage_error (status 1) or std::runtime_error-family (status 2).
int run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace qwgan
