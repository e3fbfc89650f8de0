#pragma once

#include <cstdint>

#include "qwgan/trainer.hpp"

namespace qwgan {

// Periodic Heisenberg chain: XX + YY + ZZ on every neighbor pair plus a
// uniform-random longitudinal field on every site.
struct HeisenbergSpec {
  int qubits = 2;
  double coupling = 1.0;
  double field = 1.0;  // per-site field drawn uniform on [-field, field]
  std::uint64_t seed = 0;
};

// Term order: all XX couplers (j, j+1 mod n), then YY, then ZZ, then the n
// single-site Z fields; 4n terms total.
PauliObservable heisenberg_hamiltonian(const HeisenbergSpec& spec);

struct TrotterPlan {
  int order_k = 1;        // product formula order 2k
  long steps = 0;         // repetitions r
  long gate_count = 0;    // 2 L 5^(k-1) per step
  double step_size = 0.0;
};

// r = ceil( (L t)^(1 + 1/2k) / epsilon^(1/2k) ) for L exponentials.
TrotterPlan trotter_plan(int terms, double t, double target_error, int k);

// Order-2k symmetric product circuit for exp(+i H t) using the plan's step
// count; every Hamiltonian term must act on one or two qubits.
Circuit suzuki_circuit(const PauliObservable& h, double t, long steps, int k);

Matrix exact_evolution(const PauliObservable& h, double t);  // exp(+i H t)

double suzuki_weight(int k);  // p_k = 1 / (4 - 4^(1/(2k-1)))

// (U (x) I) applied to the maximally entangled pair state.
PureState choi_state(const Matrix& u);

// Fidelity of the two channel outputs on the maximally entangled input:
// |Tr(u0^dag u1)|^2 / d^2.
double avg_output_fidelity(const Matrix& u0, const Matrix& u1);

// min over global phase of ||u0 - e^{i gamma} u1||_2, from the minimal
// enclosing arc of the eigenphases of u0^dag u1.
double worst_case_error(const Matrix& u0, const Matrix& u1);

struct CompressionConfig {
  Layout layout;  // candidate arrangement on the target register
  double lambda = 10.0;
  double eta_angles = 0.1;
  double eta_logits = 0.1;
  double eta_disc = 0.1;
  int epochs = 2000;
  int disc_steps = 1;
  RegMode reg_mode = RegMode::relaxed;
  int taylor_order = 8;
  DiscGradMethod disc_method = DiscGradMethod::frechet_exact;
  int disc_weight_cap = -1;
  double stop_fidelity = 0.0;
  double sigma = 0.0;
  bool noisy_gradients = true;
  std::uint64_t seed = 0;
};

struct CompressionResult {
  Circuit circuit;       // trained replacement on the original register
  RunHistory history;    // doubled-register training record
  double choi_fidelity;  // final training fidelity against the target state
  double avg_fidelity;   // avg_output_fidelity(circuit, target)
};

// Trains the layout against the channel state of the target unitary on a
// doubled register (maximally entangled initial state) and extracts the
// learned circuit.
CompressionResult compress_circuit(const Matrix& target_unitary,
                                   const CompressionConfig& config);

}  // namespace qwgan
