#include "qwgan/hamsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qwgan {

namespace {

PauliString two_site(int n, int a, int b, PauliLetter la, PauliLetter lb) {
  std::vector<PauliLetter> ls(size_t(n), PauliLetter::I);
  ls[size_t(a)] = la;
  ls[size_t(b)] = lb;
  return PauliString(std::move(ls));
}

PauliString one_site(int n, int a, PauliLetter l) {
  std::vector<PauliLetter> ls(size_t(n), PauliLetter::I);
  ls[size_t(a)] = l;
  return PauliString(std::move(ls));
}

}  // namespace

PauliObservable heisenberg_hamiltonian(const HeisenbergSpec& spec) {
  const int n = spec.qubits;
  if (n < 2) throw std::invalid_argument("chain needs at least two sites");
  PauliObservable h(n);
  const PauliLetter xyz[3] = {PauliLetter::X, PauliLetter::Y, PauliLetter::Z};
  for (PauliLetter l : xyz)
    for (int j = 0; j < n; ++j)
      h.add_term(spec.coupling, two_site(n, j, (j + 1) % n, l, l));
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uf(-spec.field, spec.field);
  for (int j = 0; j < n; ++j) h.add_term(uf(rng), one_site(n, j, PauliLetter::Z));
  return h;
}

double suzuki_weight(int k) {
  if (k < 2) throw std::invalid_argument("weight defined for order >= 4");
  return 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * k - 1.0)));
}

TrotterPlan trotter_plan(int terms, double t, double target_error, int k) {
  if (terms < 1) throw std::invalid_argument("term count must be positive");
  if (t <= 0.0) throw std::invalid_argument("evolution time must be positive");
  if (target_error <= 0.0) throw std::invalid_argument("target error must be positive");
  if (k < 1) throw std::invalid_argument("order index must be positive");
  const double lt = double(terms) * t;
  const double expo = 1.0 + 1.0 / (2.0 * k);
  const double raw = std::pow(lt, expo) / std::pow(target_error, 1.0 / (2.0 * k));
  TrotterPlan plan;
  plan.order_k = k;
  plan.steps = long(std::ceil(raw));
  plan.step_size = t / double(plan.steps);
  long per_step = 2 * long(terms);
  for (int i = 1; i < k; ++i) per_step *= 5;
  plan.gate_count = per_step * plan.steps;
  return plan;
}

namespace {

struct TermGate {
  std::vector<int> targets;
  PauliString axis;
  double coeff;
};

std::vector<TermGate> local_terms(const PauliObservable& h) {
  std::vector<TermGate> out;
  out.reserve(h.size());
  for (const auto& t : h.terms()) {
    std::vector<int> targets;
    std::vector<PauliLetter> axis;
    for (int q = 0; q < t.string.qubits(); ++q)
      if (t.string.letter(q) != PauliLetter::I) {
        targets.push_back(q);
        axis.push_back(t.string.letter(q));
      }
    if (targets.empty() || targets.size() > 2)
      throw std::invalid_argument("product formula needs one- or two-local terms");
    out.push_back({std::move(targets), PauliString(std::move(axis)), t.coeff});
  }
  return out;
}

// One symmetric second-order block: forward then reverse sweep, each
// exp(+i coeff (x/2) sigma).
void append_s2(Circuit& c, const std::vector<TermGate>& terms, double x) {
  for (const auto& t : terms)
    c.append(RotationGate(t.targets, t.axis, t.coeff * x));
  for (auto it = terms.rbegin(); it != terms.rend(); ++it)
    c.append(RotationGate(it->targets, it->axis, it->coeff * x));
}

void append_s2k(Circuit& c, const std::vector<TermGate>& terms, double x, int k) {
  if (k == 1) {
    append_s2(c, terms, x);
    return;
  }
  const double p = suzuki_weight(k);
  append_s2k(c, terms, p * x, k - 1);
  append_s2k(c, terms, p * x, k - 1);
  append_s2k(c, terms, (1.0 - 4.0 * p) * x, k - 1);
  append_s2k(c, terms, p * x, k - 1);
  append_s2k(c, terms, p * x, k - 1);
}

}  // namespace

Circuit suzuki_circuit(const PauliObservable& h, double t, long steps, int k) {
  if (steps < 1) throw std::invalid_argument("step count must be positive");
  if (k < 1) throw std::invalid_argument("order index must be positive");
  std::vector<TermGate> terms = local_terms(h);
  Circuit c(h.qubits());
  const double x = t / double(steps);
  for (long r = 0; r < steps; ++r) append_s2k(c, terms, x, k);
  return c;
}

Matrix exact_evolution(const PauliObservable& h, double t) {
  return mat_exp_i_herm(h.matrix() * t);
}

PureState choi_state(const Matrix& u) {
  const Eigen::Index d = u.rows();
  if (u.cols() != d) throw shape_error("unitary must be square");
  Vector amp(d * d);
  const double s = 1.0 / std::sqrt(double(d));
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index i = 0; i < d; ++i) amp[a * d + i] = s * u(a, i);
  return PureState(std::move(amp));
}

double avg_output_fidelity(const Matrix& u0, const Matrix& u1) {
  if (u0.rows() != u1.rows() || u0.cols() != u1.cols() || u0.rows() != u0.cols())
    throw shape_error("unitaries must be square of equal dimension");
  const double d = double(u0.rows());
  const cplx tr = (u0.adjoint() * u1).trace();
  return std::norm(tr) / (d * d);
}

double worst_case_error(const Matrix& u0, const Matrix& u1) {
  if (u0.rows() != u1.rows() || u0.cols() != u1.cols() || u0.rows() != u0.cols())
    throw shape_error("unitaries must be square of equal dimension");
  Eigen::ComplexEigenSolver<Matrix> solver(u0.adjoint() * u1, false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue computation failed");
  std::vector<double> phases;
  phases.reserve(size_t(u0.rows()));
  for (Eigen::Index i = 0; i < u0.rows(); ++i)
    phases.push_back(std::arg(solver.eigenvalues()[i]));
  std::sort(phases.begin(), phases.end());
  const double two_pi = 8.0 * std::atan(1.0);
  double max_gap = phases.front() + two_pi - phases.back();
  for (size_t i = 1; i < phases.size(); ++i)
    max_gap = std::max(max_gap, phases[i] - phases[i - 1]);
  const double width = two_pi - max_gap;
  return 2.0 * std::sin(width / 4.0);
}

CompressionResult compress_circuit(const Matrix& target_unitary,
                                   const CompressionConfig& config) {
  const int n = config.layout.qubits;
  const Eigen::Index d = Eigen::Index(1) << n;
  if (target_unitary.rows() != d || target_unitary.cols() != d)
    throw shape_error("target unitary dimension differs from layout register");
  if ((target_unitary.adjoint() * target_unitary - Matrix::Identity(d, d)).norm() >
      1e-8 * double(d))
    throw std::invalid_argument("target is not unitary");

  TrainingConfig tc;
  tc.layout = config.layout.embedded(2 * n, 0);
  tc.rank = 1;
  tc.lambda = config.lambda;
  tc.eta_angles = config.eta_angles;
  tc.eta_logits = config.eta_logits;
  tc.eta_disc = config.eta_disc;
  tc.epochs = config.epochs;
  tc.disc_steps = config.disc_steps;
  tc.sigma = config.sigma;
  tc.noisy_gradients = config.noisy_gradients;
  tc.reg_mode = config.reg_mode;
  tc.taylor_order = config.taylor_order;
  tc.disc_method = config.disc_method;
  tc.disc_weight_cap = config.disc_weight_cap;
  tc.stop_fidelity = config.stop_fidelity;
  tc.seed = config.seed;
  tc.initial_state = max_entangled_state(n);

  DensityMatrix target = choi_state(target_unitary).density();
  RunHistory hist = train(tc, target);

  Circuit circuit = config.layout.instantiate(hist.angles.at(0));
  const double avg = avg_output_fidelity(circuit.unitary(), target_unitary);
  const double choi_fid = hist.final_fidelity;
  return CompressionResult{std::move(circuit), std::move(hist), choi_fid, avg};
}

}  // namespace qwgan
