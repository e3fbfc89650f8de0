#include "qwgan/qcore.hpp"

#include <algorithm>
#include <cmath>

namespace qwgan {

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix DensityMatrix::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw shape_error("density matrix must be square");
  if (!m.allFinite())
    throw std::invalid_argument("density matrix has non-finite entries");
  if (!is_hermitian(m, 1e-10))
    throw std::invalid_argument("density matrix is not hermitian within 1e-10");
  Matrix sym = 0.5 * (m + m.adjoint());
  if (std::abs(sym.trace().real() - 1.0) > 1e-9 || std::abs(sym.trace().imag()) > 1e-9)
    throw std::invalid_argument("density matrix trace differs from 1 beyond 1e-9");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("density matrix has an eigenvalue below -1e-9");
  return DensityMatrix(std::move(sym));
}

DensityMatrix DensityMatrix::pure(const Vector& amplitudes) {
  PureState s(amplitudes);  // norm check
  Matrix m = s.amplitudes() * s.amplitudes().adjoint();
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  if (dim < 1) throw shape_error("dimension must be positive");
  return DensityMatrix(Matrix::Identity(dim, dim) / double(dim));
}

PureState::PureState(Vector amplitudes) : amp_(std::move(amplitudes)) {
  if (amp_.size() < 1) throw shape_error("state vector is empty");
  if (!amp_.allFinite()) throw std::invalid_argument("state vector has non-finite entries");
  if (std::abs(amp_.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("state vector norm differs from 1 beyond 1e-10");
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix partial_trace(const Matrix& m, TraceSide side, Eigen::Index dx, Eigen::Index dy) {
  if (m.rows() != dx * dy || m.cols() != dx * dy)
    throw shape_error("operator dimension does not factor as dx*dy");
  if (side == TraceSide::right) {
    Matrix out = Matrix::Zero(dx, dx);
    for (Eigen::Index i = 0; i < dx; ++i)
      for (Eigen::Index j = 0; j < dx; ++j)
        for (Eigen::Index k = 0; k < dy; ++k)
          out(i, j) += m(i * dy + k, j * dy + k);
    return out;
  }
  Matrix out = Matrix::Zero(dy, dy);
  for (Eigen::Index k = 0; k < dy; ++k)
    for (Eigen::Index l = 0; l < dy; ++l)
      for (Eigen::Index i = 0; i < dx; ++i)
        out(k, l) += m(i * dy + k, i * dy + l);
  return out;
}

EigenSystem herm_eig(const Matrix& h) {
  if (h.rows() != h.cols()) throw shape_error("eigendecomposition needs a square matrix");
  if (!is_hermitian(h, 1e-9))
    throw std::invalid_argument("matrix is not hermitian within 1e-9");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

Matrix mat_exp_herm(const Matrix& h) {
  EigenSystem es = herm_eig(h);
  return es.vectors * es.values.array().exp().matrix().asDiagonal() * es.vectors.adjoint();
}

Matrix mat_exp_i_herm(const Matrix& h) {
  EigenSystem es = herm_eig(h);
  Vector phases(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    phases(k) = std::exp(cplx(0.0, es.values(k)));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

LogResult mat_log_psd(const Matrix& m, bool floor_spectrum) {
  EigenSystem es = herm_eig(m);
  constexpr double kFloor = 1e-12;
  bool floored = false;
  RealVector logs(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    double v = es.values(k);
    if (v < kFloor) {
      if (!floor_spectrum)
        throw std::domain_error("matrix log of a singular or negative operator");
      v = kFloor;
      floored = true;
    }
    logs(k) = std::log(v);
  }
  return {es.vectors * logs.asDiagonal() * es.vectors.adjoint(), floored};
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw shape_error("fidelity needs equal dimensions");
  EigenSystem es = herm_eig(rho.matrix());
  RealVector roots = es.values.cwiseMax(0.0).cwiseSqrt();
  Matrix sqrt_rho = es.vectors * roots.asDiagonal() * es.vectors.adjoint();
  Matrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  EigenSystem es2 = herm_eig(inner);
  double sum = es2.values.cwiseMax(0.0).cwiseSqrt().sum();
  return sum * sum;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw shape_error("trace distance needs equal dimensions");
  EigenSystem es = herm_eig(rho.matrix() - sigma.matrix());
  return es.values.cwiseAbs().sum();
}

Matrix swap_operator(Eigen::Index d) {
  if (d < 1) throw shape_error("dimension must be positive");
  Matrix s = Matrix::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) s(b * d + a, a * d + b) = 1.0;
  return s;
}

Matrix cost_matrix(Eigen::Index d) {
  return 0.5 * (Matrix::Identity(d * d, d * d) - swap_operator(d));
}

PureState random_pure_state(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(gauss(rng), gauss(rng));
  v /= v.norm();
  return PureState(std::move(v));
}

DensityMatrix random_density(Eigen::Index dim, Eigen::Index rank, std::mt19937_64& rng) {
  if (rank < 1 || rank > dim) throw shape_error("rank must lie in [1, dim]");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(dim, rank);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
  Matrix m = a * a.adjoint();
  m /= m.trace().real();
  return DensityMatrix::from_matrix(m);
}

}  // namespace qwgan
