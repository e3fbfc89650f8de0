#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qwgan/circuit.hpp"
#include "qwgan/wasserstein.hpp"

namespace qwgan {

double noisy_expectation(double value, double sigma, std::mt19937_64& rng);

// Gaussian read noise applied to scalar expectation values when sigma > 0.
class Meter {
 public:
  Meter() = default;
  Meter(double sigma, std::mt19937_64* rng) : sigma_(sigma), rng_(rng) {}
  bool active() const { return sigma_ > 0.0 && rng_ != nullptr; }
  double read(double value) const {
    return active() ? noisy_expectation(value, sigma_, *rng_) : value;
  }

 private:
  double sigma_ = 0.0;
  std::mt19937_64* rng_ = nullptr;
};

enum class DiscGradMethod { commuting_form, frechet_exact };

struct DiscriminatorGradient {
  RealVector alpha;
  RealVector beta;
};

double training_loss(const GeneratorEnsemble& gen, const DensityMatrix& target,
                     const DualVariables& dv, RegMode mode,
                     int taylor_order = 8, const Meter& meter = Meter());

RealVector grad_logits(const GeneratorEnsemble& gen, const DensityMatrix& target,
                       const DualVariables& dv, RegMode mode,
                       int taylor_order = 8, const Meter& meter = Meter());

std::vector<RealVector> grad_angles_exact(const GeneratorEnsemble& gen,
                                          const DensityMatrix& target,
                                          const DualVariables& dv,
                                          RegMode mode,
                                          int taylor_order = 8,
                                          const Meter& meter = Meter());

std::vector<RealVector> grad_angles_shift(const GeneratorEnsemble& gen,
                                          const DensityMatrix& target,
                                          const DualVariables& dv,
                                          RegMode mode,
                                          int taylor_order = 8,
                                          const Meter& meter = Meter());

// d(loss)/d(alpha_k), d(loss)/d(beta_l) for the dual ascent step.
// frechet_exact differentiates the matrix exponential exactly (one Daleckii-Krein
// derivative per call); commuting_form multiplies the direction into the fixed
// regularizer, which is exact only for directions commuting with the exponent
// (identity strings) and approaches frechet_exact as lambda grows.
DiscriminatorGradient grad_discriminator(const DensityMatrix& generated,
                                         const DensityMatrix& target,
                                         const DualVariables& dv,
                                         DiscGradMethod method,
                                         RegMode mode,
                                         int taylor_order = 8,
                                         const Meter& meter = Meter());

struct TrainingConfig {
  Layout layout;
  int rank = 1;
  double lambda = 2.0;
  double eta_angles = 0.1;
  double eta_logits = 0.1;
  double eta_disc = 0.1;
  int epochs = 300;
  int disc_steps = 1;
  double sigma = 0.0;
  bool noisy_gradients = true;
  RegMode reg_mode = RegMode::exact;
  int taylor_order = 8;
  DiscGradMethod disc_method = DiscGradMethod::frechet_exact;
  int disc_weight_cap = -1;  // -1: full string basis on n qubits
  double stop_fidelity = 0.0;  // <= 0 disables early stopping
  std::uint64_t seed = 0;
  std::optional<PureState> initial_state;  // defaults to |0...0>
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double fidelity = 0.0;
  std::int64_t wall_ms = 0;
};

struct RunHistory {
  std::vector<EpochRecord> records;
  std::vector<RealVector> angles;  // one vector per ensemble circuit
  RealVector logits;
  RealVector alpha;
  RealVector beta;
  std::vector<PauliString> disc_strings;
  double final_fidelity = 0.0;
  int epochs_run = 0;
  bool reached_stop = false;
};

RunHistory train(const TrainingConfig& config, const DensityMatrix& target);

// First epoch whose fidelity reaches the threshold, or -1 if never reached.
int epochs_to_fidelity(const RunHistory& history, double threshold);

void write_history_csv(const RunHistory& history, const std::string& path);
void write_parameters(const RunHistory& history, const std::string& path);

struct DualAscentOptions {
  double learning_rate = 0.1;
  int max_iterations = 20000;
  double tolerance = 1e-10;
  int window = 200;
  DiscGradMethod method = DiscGradMethod::frechet_exact;
  // Warm start (e.g. the maximizer found at a larger lambda); coefficients
  // must live on the full string basis.  Its own lambda field is ignored.
  std::optional<DualVariables> initial;
};

struct DualAscentResult {
  DualVariables dv;
  double value = 0.0;  // loss at the maximizer, including the entropy penalty
  int iterations = 0;
};

// Gradient ascent over full-basis dual coefficients, backtracking on the rate.
DualAscentResult maximize_dual(const DensityMatrix& generated,
                               const DensityMatrix& target, double lambda,
                               const DualAscentOptions& options = DualAscentOptions());

}  // namespace qwgan
