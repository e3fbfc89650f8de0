#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qwgan/hamsim.hpp"

using namespace qwgan;

TEST_CASE("heisenberg chain construction") {
  HeisenbergSpec spec;
  spec.qubits = 3;
  spec.coupling = 0.7;
  spec.field = 0.0;
  PauliObservable h = heisenberg_hamiltonian(spec);
  REQUIRE(h.size() == 12);

  // couplers first (XX, YY, ZZ blocks), then the field terms
  for (size_t k = 0; k < 9; ++k) {
    CHECK(h.coeff(k) == doctest::Approx(0.7));
    CHECK(h.terms()[k].string.weight() == 2);
  }
  CHECK(h.terms()[0].string.str() == "XXI");
  CHECK(h.terms()[1].string.str() == "IXX");
  CHECK(h.terms()[2].string.str() == "XIX");
  CHECK(h.terms()[3].string.str() == "YYI");
  CHECK(h.terms()[6].string.str() == "ZZI");
  for (size_t k = 9; k < 12; ++k) {
    CHECK(h.coeff(k) == 0.0);
    CHECK(h.terms()[k].string.weight() == 1);
    CHECK(h.terms()[k].string.letter(int(k) - 9) == PauliLetter::Z);
  }

  Matrix dense = h.matrix();
  CHECK((dense - dense.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  spec.field = 1.3;
  spec.seed = 5;
  PauliObservable ha = heisenberg_hamiltonian(spec);
  PauliObservable hb = heisenberg_hamiltonian(spec);
  bool nonzero_field = false;
  for (size_t k = 9; k < 12; ++k) {
    CHECK(ha.coeff(k) == hb.coeff(k));
    CHECK(std::abs(ha.coeff(k)) <= 1.3);
    nonzero_field = nonzero_field || ha.coeff(k) != 0.0;
  }
  CHECK(nonzero_field);
  spec.seed = 6;
  PauliObservable hc = heisenberg_hamiltonian(spec);
  CHECK(ha.coeff(9) != hc.coeff(9));

  HeisenbergSpec bad;
  bad.qubits = 1;
  CHECK_THROWS(heisenberg_hamiltonian(bad));
}

TEST_CASE("trotter plans") {
  TrotterPlan p = trotter_plan(12, 3.0, 1e-3, 1);
  CHECK(p.order_k == 1);
  CHECK(p.steps == 6831);
  CHECK(p.gate_count == 163944);
  CHECK(p.step_size == doctest::Approx(3.0 / 6831).epsilon(1e-15));

  TrotterPlan p2 = trotter_plan(12, 3.0, 1e-3, 2);
  CHECK(p2.steps == 496);
  CHECK(p2.gate_count == 59520);

  CHECK(trotter_plan(8, 1.0, 0.1, 1).steps == 72);
  CHECK(trotter_plan(8, 1.0, 0.1, 1).gate_count == 1152);
  CHECK(trotter_plan(16, 0.5, 1e-2, 2).steps == 43);
  CHECK(trotter_plan(16, 0.5, 1e-2, 2).gate_count == 6880);

  CHECK(suzuki_weight(2) == doctest::Approx(0.4144907717943757).epsilon(1e-15));
  CHECK_THROWS(suzuki_weight(1));

  CHECK_THROWS(trotter_plan(0, 1.0, 0.1, 1));
  CHECK_THROWS(trotter_plan(4, -1.0, 0.1, 1));
  CHECK_THROWS(trotter_plan(4, 1.0, 0.0, 1));
  CHECK_THROWS(trotter_plan(4, 1.0, 0.1, 0));
}

TEST_CASE("exact evolution") {
  HeisenbergSpec spec;
  spec.qubits = 2;
  spec.seed = 3;
  PauliObservable h = heisenberg_hamiltonian(spec);

  Matrix u0 = exact_evolution(h, 0.0);
  CHECK((u0 - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  Matrix u = exact_evolution(h, 0.8);
  CHECK((u * u.adjoint() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((exact_evolution(h, -0.8) - u.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((exact_evolution(h, 0.4) * exact_evolution(h, 0.4) - u).cwiseAbs().maxCoeff() <
        1e-12);

  // sign convention: exp(+i H t) on a single-term observable
  PauliObservable z1(1);
  z1.add_term(0.9, PauliString("Z"));
  Matrix uz = exact_evolution(z1, 1.0);
  CHECK(uz(0, 0).real() == doctest::Approx(std::cos(0.9)));
  CHECK(uz(0, 0).imag() == doctest::Approx(std::sin(0.9)));
  CHECK(uz(1, 1).imag() == doctest::Approx(-std::sin(0.9)));
}

TEST_CASE("suzuki circuits") {
  // one term: the product formula is exact at every order
  PauliObservable single(2);
  single.add_term(0.6, PauliString("XZ"));
  Matrix want = exact_evolution(single, 1.3);
  for (int k : {1, 2}) {
    Circuit c = suzuki_circuit(single, 1.3, 2, k);
    CHECK((c.unitary() - want).cwiseAbs().maxCoeff() < 1e-10);
  }

  HeisenbergSpec spec;
  spec.qubits = 2;
  spec.seed = 9;
  PauliObservable h = heisenberg_hamiltonian(spec);
  Matrix exact = exact_evolution(h, 0.5);

  auto err = [&](long steps, int k) {
    return worst_case_error(suzuki_circuit(h, 0.5, steps, k).unitary(), exact);
  };

  // error decreases with the step count and with the order
  double e2 = err(2, 1), e8 = err(8, 1), e32 = err(32, 1);
  CHECK(e8 < e2);
  CHECK(e32 < e8);
  CHECK(err(8, 2) < e8);

  // rough second-order scaling for the symmetric formula
  double ratio = e8 / e32;
  CHECK(ratio > 8.0);

  // the planned step count meets its target error
  const double eps = 1e-2;
  TrotterPlan plan = trotter_plan(int(h.size()), 0.5, eps, 1);
  CHECK(err(plan.steps, 1) <= eps);

  // gate accounting: 2 L 5^(k-1) exponentials per step
  Circuit c1 = suzuki_circuit(h, 0.5, 3, 1);
  CHECK(c1.size() == size_t(2 * h.size() * 3));
  Circuit c2 = suzuki_circuit(h, 0.5, 2, 2);
  CHECK(c2.size() == size_t(2 * h.size() * 5 * 2));

  CHECK_THROWS(suzuki_circuit(h, 0.5, 0, 1));
  PauliObservable wide(3);
  wide.add_term(1.0, PauliString("XYZ"));
  CHECK_THROWS(suzuki_circuit(wide, 0.5, 2, 1));
}

TEST_CASE("channel states and fidelities") {
  std::mt19937_64 rng(17);

  PureState omega = choi_state(Matrix::Identity(4, 4));
  CHECK(omega.dim() == 16);
  Matrix rho = omega.density().matrix();
  Matrix left = partial_trace(rho, TraceSide::right, 4, 4);
  Matrix right = partial_trace(rho, TraceSide::left, 4, 4);
  CHECK((left - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((right - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-12);

  HeisenbergSpec spec;
  spec.qubits = 2;
  spec.seed = 21;
  PauliObservable h = heisenberg_hamiltonian(spec);
  Matrix u = exact_evolution(h, 0.7);
  Matrix v = exact_evolution(h, 0.9);

  CHECK(avg_output_fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(avg_output_fidelity(u, (cplx(std::cos(0.3), std::sin(0.3)) * u).eval()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  double overlap = std::norm((u.adjoint() * v).trace()) / 16.0;
  CHECK(avg_output_fidelity(u, v) == doctest::Approx(overlap).epsilon(1e-12));
  CHECK(avg_output_fidelity(u, v) ==
        doctest::Approx(fidelity(choi_state(u).density(), choi_state(v).density()))
            .epsilon(1e-7));

  CHECK(worst_case_error(u, u) == doctest::Approx(0.0));
  CHECK(worst_case_error(u, (cplx(std::cos(1.1), std::sin(1.1)) * u).eval()) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // diag(1, e^{i 0.4}): best phase splits the arc, error 2 sin(0.1)
  Matrix d = Matrix::Identity(2, 2);
  d(1, 1) = cplx(std::cos(0.4), std::sin(0.4));
  CHECK(worst_case_error(Matrix::Identity(2, 2), d) ==
        doctest::Approx(2.0 * std::sin(0.1)).epsilon(1e-12));

  CHECK_THROWS(avg_output_fidelity(u, Matrix::Identity(2, 2)));
}

TEST_CASE("single qubit rotation compresses quickly") {
  PauliObservable h(1);
  h.add_term(0.45, PauliString("X"));
  h.add_term(-0.3, PauliString("Z"));
  Matrix target = exact_evolution(h, 1.0);

  CompressionConfig cfg;
  cfg.layout = generic_layout(1, 1);
  cfg.epochs = 500;
  cfg.stop_fidelity = 0.999;
  cfg.seed = 2;
  CompressionResult res = compress_circuit(target, cfg);
  CHECK(res.circuit.qubits() == 1);
  CHECK(res.circuit.size() == cfg.layout.parameter_count());
  CHECK(res.choi_fidelity >= 0.999);
  CHECK(res.avg_fidelity >= 0.999);
  CHECK(res.avg_fidelity ==
        doctest::Approx(avg_output_fidelity(res.circuit.unitary(), target)).epsilon(1e-12));
}
