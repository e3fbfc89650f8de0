#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "qwgan/qcore.hpp"

using namespace qwgan;

namespace {

Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return scale * 0.5 * (m + m.adjoint()).eval();
}

}  // namespace

TEST_CASE("density matrix validation") {
  Matrix ok(2, 2);
  ok << 0.75, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.25;
  DensityMatrix rho = DensityMatrix::from_matrix(ok);
  CHECK(rho.dim() == 2);
  CHECK(std::abs(rho.matrix().trace().real() - 1.0) < 1e-12);

  Matrix bad_herm(2, 2);
  bad_herm << 0.5, cplx(0.3, 0.0), cplx(0.0, 0.0), 0.5;
  CHECK_THROWS(DensityMatrix::from_matrix(bad_herm));

  Matrix bad_trace = 2.0 * ok;
  CHECK_THROWS(DensityMatrix::from_matrix(bad_trace));

  Matrix bad_psd(2, 2);
  bad_psd << 1.5, 0.0, 0.0, -0.5;
  CHECK_THROWS(DensityMatrix::from_matrix(bad_psd));
}

TEST_CASE("pure and maximally mixed constructors") {
  Vector u(2);
  u << cplx(0.6, 0.0), cplx(0.0, 0.8);
  DensityMatrix rho = DensityMatrix::pure(u);
  CHECK((rho.matrix() - u * u.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  Vector unnorm(2);
  unnorm << 1.0, 1.0;
  CHECK_THROWS(PureState(unnorm));

  DensityMatrix mm = DensityMatrix::maximally_mixed(4);
  CHECK((mm.matrix() - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("kron dimensions and mixed-product identity") {
  std::mt19937_64 rng(5);
  Matrix a = random_hermitian(2, rng), b = random_hermitian(3, rng);
  Matrix c = random_hermitian(2, rng), d = random_hermitian(3, rng);
  Matrix lhs = kron(a, b) * kron(c, d);
  Matrix rhs = kron((a * c).eval(), (b * d).eval());
  CHECK(lhs.rows() == 6);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(kron(a, b).trace() - a.trace() * b.trace()) < 1e-12);
}

TEST_CASE("partial trace recovers tensor factors") {
  std::mt19937_64 rng(7);
  Matrix a = random_hermitian(2, rng), b = random_hermitian(4, rng);
  Matrix m = kron(a, b);
  Matrix ta = partial_trace(m, TraceSide::right, 2, 4);
  Matrix tb = partial_trace(m, TraceSide::left, 2, 4);
  CHECK((ta - b.trace() * a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((tb - a.trace() * b).cwiseAbs().maxCoeff() < 1e-12);

  Matrix w = random_hermitian(8, rng);
  CHECK(std::abs(partial_trace(w, TraceSide::right, 2, 4).trace() - w.trace()) < 1e-12);
  CHECK(std::abs(partial_trace(w, TraceSide::left, 2, 4).trace() - w.trace()) < 1e-12);
}

TEST_CASE("hermitian eigensolver") {
  std::mt19937_64 rng(11);
  Matrix h = random_hermitian(6, rng);
  EigenSystem es = herm_eig(h);
  Matrix rebuilt = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
  CHECK((rebuilt - h).cwiseAbs().maxCoeff() < 1e-12);
  for (long i = 1; i < es.values.size(); ++i) CHECK(es.values[i] >= es.values[i - 1]);

  Matrix skew(2, 2);
  skew << 0.0, 1.0, -1.0, 0.0;
  CHECK_THROWS(herm_eig(skew));
}

TEST_CASE("matrix exponential and logarithm") {
  std::mt19937_64 rng(13);
  Matrix h = random_hermitian(4, rng, 0.3);
  Matrix eh = mat_exp_herm(h);
  Matrix series = Matrix::Identity(4, 4);
  Matrix pow = Matrix::Identity(4, 4);
  double fact = 1.0;
  for (int k = 1; k <= 20; ++k) {
    pow = (pow * h).eval();
    fact *= k;
    series += pow / fact;
  }
  CHECK((eh - series).cwiseAbs().maxCoeff() < 1e-12);

  Matrix u = mat_exp_i_herm(h);
  CHECK((u * u.adjoint() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  LogResult lr = mat_log_psd(eh, false);
  CHECK(!lr.floored);
  CHECK((lr.value - h).cwiseAbs().maxCoeff() < 1e-10);

  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS((void)mat_log_psd(singular, false), std::domain_error);
  CHECK(mat_log_psd(singular, true).floored);
}

TEST_CASE("golden-thompson inequality") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_hermitian(4, rng), b = random_hermitian(4, rng);
    double lhs = mat_exp_herm(a + b).trace().real();
    double rhs = (mat_exp_herm(a) * mat_exp_herm(b)).trace().real();
    CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("fidelity and trace distance") {
  std::mt19937_64 rng(19);
  PureState u = random_pure_state(4, rng), v = random_pure_state(4, rng);
  double overlap = std::norm(u.amplitudes().dot(v.amplitudes()));
  CHECK(fidelity(u.density(), v.density()) == doctest::Approx(overlap).epsilon(5e-8));
  CHECK(fidelity(u.density(), u.density()) == doctest::Approx(1.0).epsilon(5e-8));

  Vector e0 = Vector::Zero(2), e1 = Vector::Zero(2);
  e0[0] = 1.0;
  e1[1] = 1.0;
  DensityMatrix p0 = DensityMatrix::pure(e0), p1 = DensityMatrix::pure(e1);
  CHECK(trace_distance(p0, p1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(trace_distance(p0, p0) == doctest::Approx(0.0).epsilon(1e-12));

  DensityMatrix r1 = random_density(4, 2, rng), r2 = random_density(4, 3, rng);
  CHECK(trace_distance(r1, r2) == doctest::Approx(trace_distance(r2, r1)).epsilon(1e-12));
}

TEST_CASE("swap operator and coupling cost") {
  std::mt19937_64 rng(23);
  const Eigen::Index d = 3;
  Matrix s = swap_operator(d);
  PureState u = random_pure_state(d, rng), v = random_pure_state(d, rng);
  Vector uv = kron(Matrix(u.amplitudes()), Matrix(v.amplitudes())).col(0);
  Vector vu = kron(Matrix(v.amplitudes()), Matrix(u.amplitudes())).col(0);
  CHECK((s * uv - vu).cwiseAbs().maxCoeff() < 1e-12);

  Matrix c = cost_matrix(d);
  CHECK((c * c - c).cwiseAbs().maxCoeff() < 1e-12);  // projector
  CHECK(std::abs(c.trace().real() - double(d * (d - 1)) / 2.0) < 1e-12);
  EigenSystem es = herm_eig(c);
  CHECK(es.values.minCoeff() > -1e-12);
  CHECK(es.values.maxCoeff() < 1.0 + 1e-12);
}

TEST_CASE("seeded sampling is deterministic and valid") {
  std::mt19937_64 a(42), b(42), c(43);
  PureState pa = random_pure_state(4, a), pb = random_pure_state(4, b),
            pc = random_pure_state(4, c);
  CHECK((pa.amplitudes() - pb.amplitudes()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pa.amplitudes() - pc.amplitudes()).cwiseAbs().maxCoeff() > 1e-3);
  CHECK(std::abs(pa.amplitudes().norm() - 1.0) < 1e-12);

  std::mt19937_64 rng(29);
  for (int rank : {1, 2, 4}) {
    DensityMatrix rho = random_density(4, rank, rng);
    EigenSystem es = herm_eig(rho.matrix());
    CHECK(es.values.minCoeff() > -1e-12);
    CHECK(std::abs(es.values.sum() - 1.0) < 1e-10);
    int support = 0;
    for (long i = 0; i < es.values.size(); ++i)
      if (es.values[i] > 1e-10) ++support;
    CHECK(support <= rank);
  }
}
