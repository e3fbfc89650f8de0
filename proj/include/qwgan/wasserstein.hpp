#pragma once

#include <vector>

#include "qwgan/pauli.hpp"
#include "qwgan/qcore.hpp"

namespace qwgan {

// min Tr(pi * C) over couplings pi >= 0 with Tr_Y(pi) = P, Tr_X(pi) = Q,
// where C = (1 - SWAP)/2.  Solved by over-relaxed ADMM alternating the exact
// least-squares projection onto the marginal affine set with eigenvalue
// clipping onto the PSD cone; pure marginals make the feasible set a
// singleton with empty interior, which plain projected-gradient/Dykstra
// schemes approach too slowly to be usable.
struct CouplingProblem {
  DensityMatrix P;
  DensityMatrix Q;
  double rho0 = 1.0;  // initial penalty, rebalanced from the residual ratio
  long max_iterations = 200000;
  double marginal_tolerance = 1e-8;
  double residual_tolerance = 1e-11;
};

struct CouplingResult {
  double value = 0.0;
  Matrix coupling;
  long iterations = 0;
  double marginal_residual = 0.0;
  double psd_residual = 0.0;
};

CouplingResult qw_primal(const CouplingProblem& prob);

// 0.5 * (1 - |<u,v>|^2)
double qw_pure(const PureState& u, const PureState& v);

// Discriminator pair (phi on the generated side, psi on the target side)
// plus the entropic regularization strength.
struct DualVariables {
  DualVariables(PauliObservable phi_in, PauliObservable psi_in, double lambda_in);
  PauliObservable phi;
  PauliObservable psi;
  double lambda;
  int qubits() const { return phi.qubits(); }
  Eigen::Index dim() const { return phi.dim(); }
};

// Tr(Q psi) - Tr(P phi); a pair is feasible for the unregularized dual when
// C - I(x)psi + phi(x)I >= 0.
double dual_objective(const DensityMatrix& P, const DensityMatrix& Q, const DualVariables& dv);

struct DualFeasibility {
  bool feasible;
  double min_eigenvalue;  // of C - I(x)psi + phi(x)I
};
DualFeasibility dual_feasibility(const DualVariables& dv);

// Shifts psi by a multiple of the identity so the pair becomes feasible;
// returns the shifted pair (objective drops by the shift).
DualVariables feasibility_shift(const DualVariables& dv);

enum class RegMode { exact, relaxed, pauli_decomposed };

// (lambda/e) * exp((-C - phi(x)I + I(x)psi)/lambda)
Matrix regularizer_exact(const DualVariables& dv);
// Symmetric splitting exp(-C/2l) exp((-phi(x)I + I(x)psi)/l) exp(-C/2l);
// carries no lambda/e prefactor.
Matrix regularizer_relaxed(const DualVariables& dv);

// One measurable term of the decomposed regularizer: coeff times a Pauli
// string on the doubled register, optionally left-multiplied by SWAP.
struct RegularizerTerm {
  double coeff;
  bool with_swap;
  PauliString string;  // 2n letters
};

struct RegularizerForm {
  RegMode mode = RegMode::pauli_decomposed;
  int taylor_order = 0;
  double truncation_bound = 0.0;
  int qubits = 0;  // per side
  std::vector<RegularizerTerm> terms;

  Matrix dense() const;  // reconstruction on dim 4^qubits
};

// Taylor-expands the middle factor of the relaxed form to the given order in
// the string algebra and folds in the swap sandwich; the result approximates
// the exact regularizer (prefactor included) within truncation_bound plus the
// splitting error.
RegularizerForm decompose_regularizer(const DualVariables& dv, int taylor_order);

// Dense regularizer for the requested mode, always including the lambda/e
// prefactor so the three modes are directly comparable.
Matrix regularizer_dense(const DualVariables& dv, RegMode mode, int taylor_order = 8);

// Tr(Q psi) - Tr(P phi) - Tr[(P(x)Q) Xi] with Xi per regularizer_dense.
double gan_loss(const DensityMatrix& P, const DensityMatrix& Q, const DualVariables& dv,
                RegMode mode = RegMode::exact, int taylor_order = 8);

// Tr[M (A(x)B)] = Tr[right_contract(M,B) A] = Tr[left_contract(M,A) B]
Matrix right_contract(const Matrix& m, const Matrix& b);
Matrix left_contract(const Matrix& m, const Matrix& a);

// Frechet derivative of the matrix exponential at hermitian h in a hermitian
// direction (divided-difference construction in the eigenbasis).
Matrix dexp_herm(const EigenSystem& es, const Matrix& direction);
Matrix dexp_herm(const Matrix& h, const Matrix& direction);

}  // namespace qwgan
