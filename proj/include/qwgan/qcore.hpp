#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>

namespace qwgan {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when an iterative solver exhausts its budget without meeting its
// stopping tolerances; carries the residuals it ended with.
struct convergence_error : std::runtime_error {
  convergence_error(const std::string& what, double marginal, double psd)
      : std::runtime_error(what), marginal_residual(marginal), psd_residual(psd) {}
  double marginal_residual;
  double psd_residual;
};

bool is_hermitian(const Matrix& m, double tol);

// Trace-one positive semidefinite operator.  Construction validates
// hermiticity (1e-10), eigenvalue floor (-1e-9) and unit trace (1e-9), then
// stores the symmetrized matrix.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(const Matrix& m);
  static DensityMatrix pure(const Vector& amplitudes);
  static DensityMatrix maximally_mixed(Eigen::Index dim);

  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  explicit DensityMatrix(Matrix m) : mat_(std::move(m)) {}
  Matrix mat_;
};

// Unit-norm state vector (norm checked to 1e-10).
class PureState {
 public:
  explicit PureState(Vector amplitudes);
  const Vector& amplitudes() const { return amp_; }
  Eigen::Index dim() const { return amp_.size(); }
  DensityMatrix density() const { return DensityMatrix::pure(amp_); }

 private:
  Vector amp_;
};

Matrix kron(const Matrix& a, const Matrix& b);

enum class TraceSide { left, right };

// Contracts one tensor factor of an operator on X (dim dx) tensor Y (dim dy).
// TraceSide::right yields the X marginal, TraceSide::left the Y marginal.
Matrix partial_trace(const Matrix& m, TraceSide side, Eigen::Index dx, Eigen::Index dy);

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns, matching order
};

// Requires hermiticity within 1e-9 (input is symmetrized before solving).
EigenSystem herm_eig(const Matrix& h);

Matrix mat_exp_herm(const Matrix& h);    // exp(h), h hermitian
Matrix mat_exp_i_herm(const Matrix& h);  // exp(i*h), unitary for hermitian h

// Log of a positive semidefinite matrix.  With floor_spectrum, eigenvalues
// below 1e-12 are clamped there (and the flag result reports it happened);
// without it a singular input raises std::domain_error.
struct LogResult {
  Matrix value;
  bool floored;
};
LogResult mat_log_psd(const Matrix& m, bool floor_spectrum);

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// Exchange operator on C^d tensor C^d and the coupling cost (1 - SWAP)/2,
// the projector onto the antisymmetric subspace.
Matrix swap_operator(Eigen::Index d);
Matrix cost_matrix(Eigen::Index d);

// Seeded sampling helpers (Hilbert-Schmidt measure for mixed states).
PureState random_pure_state(Eigen::Index dim, std::mt19937_64& rng);
DensityMatrix random_density(Eigen::Index dim, Eigen::Index rank, std::mt19937_64& rng);

}  // namespace qwgan
