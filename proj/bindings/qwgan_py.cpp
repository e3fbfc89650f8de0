#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwgan/hamsim.hpp"
#include "qwgan/trainer.hpp"

namespace py = pybind11;
using namespace qwgan;

namespace {

RegMode mode_of(const std::string& name) {
  if (name == "exact") return RegMode::exact;
  if (name == "relaxed") return RegMode::relaxed;
  if (name == "decomposed") return RegMode::pauli_decomposed;
  throw std::invalid_argument("unknown regularizer mode: " + name);
}

Layout layout_of(const std::string& name, int qubits, int depth) {
  if (name == "generic") return generic_layout(qubits, depth);
  if (name == "ionq") return ionq_layout(qubits);
  throw std::invalid_argument("unknown layout: " + name);
}

DualVariables parse_dual(const std::string& phi, const std::string& psi, double lambda) {
  return DualVariables(PauliObservable::parse(phi), PauliObservable::parse(psi), lambda);
}

py::dict history_dict(const RunHistory& h) {
  std::vector<int> epochs;
  std::vector<double> loss, fid;
  for (const EpochRecord& r : h.records) {
    epochs.push_back(r.epoch);
    loss.push_back(r.loss);
    fid.push_back(r.fidelity);
  }
  py::dict d;
  d["epoch"] = epochs;
  d["loss"] = loss;
  d["fidelity"] = fid;
  d["final_fidelity"] = h.final_fidelity;
  d["epochs_run"] = h.epochs_run;
  d["reached_stop"] = h.reached_stop;
  d["logits"] = h.logits;
  d["angles"] = h.angles;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "quantum Wasserstein GAN core operations";

  py::register_exception<shape_error>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<convergence_error>(m, "ConvergenceError", PyExc_RuntimeError);

  m.def(
      "qw_pure",
      [](const Vector& u, const Vector& v) { return qw_pure(PureState(u), PureState(v)); },
      py::arg("u"), py::arg("v"),
      "Wasserstein semimetric between two pure states: 0.5 * (1 - |<u,v>|^2).");

  m.def(
      "qw_primal",
      [](const Matrix& p, const Matrix& q, long max_iterations) {
        CouplingProblem prob{DensityMatrix::from_matrix(p), DensityMatrix::from_matrix(q)};
        prob.max_iterations = max_iterations;
        CouplingResult r = qw_primal(prob);
        py::dict d;
        d["value"] = r.value;
        d["coupling"] = r.coupling;
        d["iterations"] = r.iterations;
        d["marginal_residual"] = r.marginal_residual;
        d["psd_residual"] = r.psd_residual;
        return d;
      },
      py::arg("p"), py::arg("q"), py::arg("max_iterations") = 200000,
      "Optimal coupling of two density matrices under the symmetric-subspace cost.");

  m.def(
      "gan_loss",
      [](const Matrix& p, const Matrix& q, const std::string& phi, const std::string& psi,
         double lambda, const std::string& mode, int taylor_order) {
        return gan_loss(DensityMatrix::from_matrix(p), DensityMatrix::from_matrix(q),
                        parse_dual(phi, psi, lambda), mode_of(mode), taylor_order);
      },
      py::arg("p"), py::arg("q"), py::arg("phi"), py::arg("psi"), py::arg("lambda"),
      py::arg("mode") = "exact", py::arg("taylor_order") = 8,
      "Entropically regularized adversarial loss for text-form discriminator pairs.");

  m.def(
      "maximize_dual",
      [](const Matrix& p, const Matrix& q, double lambda, int max_iterations) {
        DualAscentOptions opt;
        opt.max_iterations = max_iterations;
        DualAscentResult r =
            maximize_dual(DensityMatrix::from_matrix(p), DensityMatrix::from_matrix(q), lambda, opt);
        py::dict d;
        d["value"] = r.value;
        d["iterations"] = r.iterations;
        d["phi"] = r.dv.phi.str();
        d["psi"] = r.dv.psi.str();
        return d;
      },
      py::arg("p"), py::arg("q"), py::arg("lambda"), py::arg("max_iterations") = 20000,
      "Ascend the regularized dual over the full string basis.");

  m.def(
      "fidelity",
      [](const Matrix& p, const Matrix& q) {
        return fidelity(DensityMatrix::from_matrix(p), DensityMatrix::from_matrix(q));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "trace_distance",
      [](const Matrix& p, const Matrix& q) {
        return trace_distance(DensityMatrix::from_matrix(p), DensityMatrix::from_matrix(q));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "random_density",
      [](Eigen::Index dim, Eigen::Index rank, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return random_density(dim, rank, rng).matrix();
      },
      py::arg("dim"), py::arg("rank"), py::arg("seed"),
      "Reproducible random density matrix of the given rank.");

  m.def(
      "train",
      [](const Matrix& target, const std::string& layout, int depth, int rank, double lambda,
         double eta, int epochs, double sigma, const std::string& mode, int disc_weight_cap,
         double stop_fidelity, std::uint64_t seed) {
        DensityMatrix t = DensityMatrix::from_matrix(target);
        int qubits = 0;
        for (Eigen::Index d = t.dim(); d > 1; d >>= 1) ++qubits;
        TrainingConfig cfg;
        cfg.layout = layout_of(layout, qubits, depth);
        cfg.rank = rank;
        cfg.lambda = lambda;
        cfg.eta_angles = cfg.eta_logits = cfg.eta_disc = eta;
        cfg.epochs = epochs;
        cfg.sigma = sigma;
        cfg.reg_mode = mode_of(mode);
        cfg.disc_weight_cap = disc_weight_cap;
        cfg.stop_fidelity = stop_fidelity;
        cfg.seed = seed;
        return history_dict(train(cfg, t));
      },
      py::arg("target"), py::arg("layout") = "generic", py::arg("depth") = 3,
      py::arg("rank") = 1, py::arg("lambda") = 2.0, py::arg("eta") = 0.1,
      py::arg("epochs") = 300, py::arg("sigma") = 0.0, py::arg("mode") = "exact",
      py::arg("disc_weight_cap") = -1, py::arg("stop_fidelity") = 0.0, py::arg("seed") = 0,
      "Adversarial training of a parameterized mixture toward a target density.");

  m.def(
      "compress",
      [](const Matrix& target_unitary, const std::string& layout, int depth, double lambda,
         int epochs, const std::string& mode, int disc_weight_cap, double stop_fidelity,
         std::uint64_t seed) {
        int qubits = 0;
        for (Eigen::Index d = target_unitary.rows(); d > 1; d >>= 1) ++qubits;
        CompressionConfig cfg;
        cfg.layout = layout_of(layout, qubits, depth);
        cfg.lambda = lambda;
        cfg.epochs = epochs;
        cfg.reg_mode = mode_of(mode);
        cfg.disc_weight_cap = disc_weight_cap;
        cfg.stop_fidelity = stop_fidelity;
        cfg.seed = seed;
        CompressionResult r = compress_circuit(target_unitary, cfg);
        py::dict d = history_dict(r.history);
        d["choi_fidelity"] = r.choi_fidelity;
        d["avg_fidelity"] = r.avg_fidelity;
        d["unitary"] = r.circuit.unitary();
        d["gate_count"] = r.circuit.size();
        return d;
      },
      py::arg("target_unitary"), py::arg("layout") = "generic", py::arg("depth") = 3,
      py::arg("lambda") = 10.0, py::arg("epochs") = 2000, py::arg("mode") = "relaxed",
      py::arg("disc_weight_cap") = -1, py::arg("stop_fidelity") = 0.0, py::arg("seed") = 0,
      "Learn a short circuit whose channel state matches the target unitary's.");

  m.def(
      "heisenberg",
      [](int qubits, double coupling, double field, std::uint64_t seed) {
        HeisenbergSpec spec{qubits, coupling, field, seed};
        PauliObservable h = heisenberg_hamiltonian(spec);
        py::dict d;
        d["text"] = h.str();
        d["matrix"] = h.matrix();
        return d;
      },
      py::arg("qubits"), py::arg("coupling") = 1.0, py::arg("field") = 1.0, py::arg("seed") = 0,
      "Nearest-neighbor XX+YY+ZZ chain with random on-site Z fields.");

  m.def(
      "exact_evolution",
      [](const std::string& hamiltonian, double t) {
        return exact_evolution(PauliObservable::parse(hamiltonian), t);
      },
      py::arg("hamiltonian"), py::arg("t"), "exp(+i H t) for a text-form Hamiltonian.");

  m.def(
      "suzuki_unitary",
      [](const std::string& hamiltonian, double t, long steps, int k) {
        return suzuki_circuit(PauliObservable::parse(hamiltonian), t, steps, k).unitary();
      },
      py::arg("hamiltonian"), py::arg("t"), py::arg("steps"), py::arg("k") = 1,
      "Unitary of the order-2k product-formula circuit.");

  m.def(
      "trotter_plan",
      [](int terms, double t, double target_error, int k) {
        TrotterPlan p = trotter_plan(terms, t, target_error, k);
        py::dict d;
        d["order_k"] = p.order_k;
        d["steps"] = p.steps;
        d["gate_count"] = p.gate_count;
        d["step_size"] = p.step_size;
        return d;
      },
      py::arg("terms"), py::arg("t"), py::arg("target_error"), py::arg("k") = 1,
      "Step and gate budget for a product formula at the requested error.");

  m.def(
      "avg_output_fidelity",
      [](const Matrix& u0, const Matrix& u1) { return avg_output_fidelity(u0, u1); },
      py::arg("u0"), py::arg("u1"));
}
