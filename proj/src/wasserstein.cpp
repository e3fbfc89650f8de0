#include "qwgan/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qwgan {

namespace {

// m += scale * (a (x) I_dq)
void add_kron_right_identity(Matrix& m, const Matrix& a, double scale, Eigen::Index dq) {
  const Eigen::Index dp = a.rows();
  for (Eigen::Index i = 0; i < dp; ++i)
    for (Eigen::Index j = 0; j < dp; ++j) {
      cplx v = scale * a(i, j);
      for (Eigen::Index k = 0; k < dq; ++k) m(i * dq + k, j * dq + k) += v;
    }
}

// m += scale * (I_dp (x) b)
void add_kron_left_identity(Matrix& m, const Matrix& b, double scale, Eigen::Index dp) {
  const Eigen::Index dq = b.rows();
  for (Eigen::Index i = 0; i < dp; ++i)
    for (Eigen::Index k = 0; k < dq; ++k)
      for (Eigen::Index l = 0; l < dq; ++l) m(i * dq + k, i * dq + l) += scale * b(k, l);
}

double marginal_residual(const Matrix& pi, const Matrix& Pm, const Matrix& Qm,
                         Eigen::Index dp, Eigen::Index dq) {
  double rp = (partial_trace(pi, TraceSide::right, dp, dq) - Pm).norm();
  double rq = (partial_trace(pi, TraceSide::left, dp, dq) - Qm).norm();
  return std::max(rp, rq);
}

struct AdmmOut {
  double value = 0.0;
  Matrix coupling;
  long iterations = 0;
  double marginal_residual = 0.0;
  double psd_residual = 0.0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

AdmmOut admm_coupling(const Matrix& Pm, const Matrix& Qm, const Matrix& C, double rho0,
                      long max_iterations, double residual_tolerance) {
  const Eigen::Index dp = Pm.rows();
  const Eigen::Index dq = Qm.rows();
  const Eigen::Index D = dp * dq;

  // Least-squares correction onto both marginal constraints at once; the
  // identity term removes the doubly-counted shared trace component.
  auto project_marginals = [&](Matrix& m) {
    Matrix dP = Pm - partial_trace(m, TraceSide::right, dp, dq);
    Matrix dQ = Qm - partial_trace(m, TraceSide::left, dp, dq);
    double excess = dP.trace().real();
    add_kron_right_identity(m, dP, 1.0 / double(dq), dq);
    add_kron_left_identity(m, dQ, 1.0 / double(dp), dp);
    m.diagonal().array() -= excess / double(D);
  };

  Eigen::SelfAdjointEigenSolver<Matrix> es;
  Matrix Z = kron(Pm, Qm);
  Matrix U = Matrix::Zero(D, D);
  Matrix pi = Z;
  double rho = rho0;
  const double relax = 1.6;
  AdmmOut out;

  for (long t = 1; t <= max_iterations; ++t) {
    out.iterations = t;
    pi = Z - U - C * (1.0 / rho);
    project_marginals(pi);
    Matrix pi_relax = relax * pi + (1.0 - relax) * Z;
    Matrix w = pi_relax + U;
    w = 0.5 * (w + w.adjoint());
    es.compute(w);
    Matrix z_prev = std::move(Z);
    RealVector clipped = es.eigenvalues().cwiseMax(0.0);
    Z = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    Z = 0.5 * (Z + Z.adjoint());
    U += pi_relax - Z;
    out.primal_residual = (pi - Z).norm();
    out.dual_residual = rho * (Z - z_prev).norm();
    if (out.primal_residual <= residual_tolerance &&
        out.dual_residual <= residual_tolerance) {
      out.converged = true;
      break;
    }
    if (t % 50 == 0) {
      if (out.primal_residual > 10.0 * out.dual_residual) {
        rho *= 2.0;
        U *= 0.5;
      } else if (out.dual_residual > 10.0 * out.primal_residual) {
        rho *= 0.5;
        U *= 2.0;
      }
    }
  }

  // Certify from the PSD-side iterate pushed back onto the marginal set:
  // marginals become exact and any residual moves into the spectrum.
  Matrix cand = std::move(Z);
  project_marginals(cand);
  out.marginal_residual = marginal_residual(cand, Pm, Qm, dp, dq);
  es.compute(cand);
  out.psd_residual = std::max(0.0, -es.eigenvalues().minCoeff());
  out.value = (cand * C).trace().real();
  out.coupling = std::move(cand);
  return out;
}

// Basis of the support (eigenvalue above cutoff relative to the largest).
Matrix support_basis(const Matrix& m, double cutoff) {
  EigenSystem es = herm_eig(m);
  const double top = es.values.maxCoeff();
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] > cutoff * std::max(top, 1e-300)) ++keep;
  Matrix basis(m.rows(), keep);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] > cutoff * std::max(top, 1e-300)) basis.col(c++) = es.vectors.col(i);
  return basis;
}

}  // namespace

CouplingResult qw_primal(const CouplingProblem& prob) {
  const Eigen::Index d = prob.P.dim();
  if (prob.Q.dim() != d) throw shape_error("coupling marginals need equal dimensions");
  if (d > 64) throw shape_error("primal oracle is limited to side dimension 64");

  // Any coupling is confined to supp(P) (x) supp(Q), so solve there: the
  // reduced marginals are full rank, restoring a strict interior (pure
  // marginals otherwise leave a singleton no first-order scheme resolves).
  const Matrix VP = support_basis(prob.P.matrix(), 1e-12);
  const Matrix VQ = support_basis(prob.Q.matrix(), 1e-12);
  const bool reduced = VP.cols() < d || VQ.cols() < d;
  const Matrix C = cost_matrix(d);

  Matrix Pm = prob.P.matrix();
  Matrix Qm = prob.Q.matrix();
  Matrix Cr = C;
  if (reduced) {
    Pm = VP.adjoint() * prob.P.matrix() * VP;
    Pm = 0.5 * (Pm + Pm.adjoint());
    Pm /= Pm.trace().real();
    Qm = VQ.adjoint() * prob.Q.matrix() * VQ;
    Qm = 0.5 * (Qm + Qm.adjoint());
    Qm /= Qm.trace().real();
    const Matrix W = kron(VP, VQ);
    Cr = W.adjoint() * C * W;
    Cr = 0.5 * (Cr + Cr.adjoint());
  }

  AdmmOut res =
      admm_coupling(Pm, Qm, Cr, prob.rho0, prob.max_iterations, prob.residual_tolerance);
  if (!res.converged &&
      (res.marginal_residual > prob.marginal_tolerance || res.primal_residual > 1e-8 ||
       res.dual_residual > 1e-8))
    throw convergence_error("coupling solver exhausted its iteration budget",
                            res.marginal_residual, res.psd_residual);

  CouplingResult out;
  out.value = res.value;
  out.iterations = res.iterations;
  out.psd_residual = res.psd_residual;
  if (reduced) {
    const Matrix W = kron(VP, VQ);
    out.coupling = W * res.coupling * W.adjoint();
    out.marginal_residual =
        marginal_residual(out.coupling, prob.P.matrix(), prob.Q.matrix(), d, d);
  } else {
    out.coupling = std::move(res.coupling);
    out.marginal_residual = res.marginal_residual;
  }
  return out;
}

double qw_pure(const PureState& u, const PureState& v) {
  if (u.dim() != v.dim()) throw shape_error("states need equal dimensions");
  double overlap = std::norm(u.amplitudes().dot(v.amplitudes()));
  return 0.5 * (1.0 - overlap);
}

DualVariables::DualVariables(PauliObservable phi_in, PauliObservable psi_in, double lambda_in)
    : phi(std::move(phi_in)), psi(std::move(psi_in)), lambda(lambda_in) {
  if (phi.qubits() != psi.qubits())
    throw shape_error("discriminator pair must share the qubit count");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
}

double dual_objective(const DensityMatrix& P, const DensityMatrix& Q, const DualVariables& dv) {
  if (P.dim() != dv.dim() || Q.dim() != dv.dim())
    throw shape_error("state dimension mismatch in dual objective");
  return dv.psi.expectation(Q) - dv.phi.expectation(P);
}

namespace {
Matrix dual_constraint_matrix(const DualVariables& dv) {
  Eigen::Index d = dv.dim();
  Matrix m = cost_matrix(d);
  Matrix id = Matrix::Identity(d, d);
  m -= kron(id, dv.psi.matrix());
  m += kron(dv.phi.matrix(), id);
  return m;
}
}  // namespace

DualFeasibility dual_feasibility(const DualVariables& dv) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(dual_constraint_matrix(dv), Eigen::EigenvaluesOnly);
  double mineig = es.eigenvalues().minCoeff();
  return {mineig >= -1e-9, mineig};
}

DualVariables feasibility_shift(const DualVariables& dv) {
  DualFeasibility f = dual_feasibility(dv);
  if (f.min_eigenvalue >= 0.0) return dv;
  double mu = -f.min_eigenvalue + 1e-12;
  DualVariables out = dv;
  PauliString id = PauliString::identity(out.psi.qubits());
  for (size_t k = 0; k < out.psi.size(); ++k)
    if (out.psi.terms()[k].string == id) {
      out.psi.set_coeff(k, out.psi.coeff(k) - mu);
      return out;
    }
  out.psi.add_term(-mu, id);
  return out;
}

namespace {
Matrix exponent_argument(const DualVariables& dv) {
  Eigen::Index d = dv.dim();
  Matrix id = Matrix::Identity(d, d);
  Matrix w = -cost_matrix(d);
  w -= kron(dv.phi.matrix(), id);
  w += kron(id, dv.psi.matrix());
  return w / dv.lambda;
}
}  // namespace

Matrix regularizer_exact(const DualVariables& dv) {
  return (dv.lambda / M_E) * mat_exp_herm(exponent_argument(dv));
}

Matrix regularizer_relaxed(const DualVariables& dv) {
  Eigen::Index d = dv.dim();
  double c = std::expm1(-0.5 / dv.lambda);
  Matrix edge = Matrix::Identity(d * d, d * d) + c * cost_matrix(d);
  Matrix mid = kron(mat_exp_herm(-dv.phi.matrix() / dv.lambda),
                    mat_exp_herm(dv.psi.matrix() / dv.lambda));
  return edge * mid * edge;
}

namespace {

std::string swapped_halves(const std::string& s) {
  size_t n = s.size() / 2;
  return s.substr(n) + s.substr(0, n);
}

double spectral_norm_of_argument(const DualVariables& dv) {
  EigenSystem ephi = herm_eig(dv.phi.matrix());
  EigenSystem epsi = herm_eig(dv.psi.matrix());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ephi.values.size(); ++i)
    for (Eigen::Index j = 0; j < epsi.values.size(); ++j)
      worst = std::max(worst, std::abs(-ephi.values(i) + epsi.values(j)));
  return worst / dv.lambda;
}

}  // namespace

RegularizerForm decompose_regularizer(const DualVariables& dv, int taylor_order) {
  if (taylor_order < 1) throw std::invalid_argument("taylor order must be at least 1");
  const int n = dv.qubits();
  const std::string id2n(size_t(2 * n), 'I');

  // middle-factor generator (-phi(x)I + I(x)psi)/lambda in string form
  std::map<std::string, double> gen;
  for (const PauliTerm& t : dv.phi.terms()) {
    if (t.coeff == 0.0) continue;
    gen[t.string.str() + std::string(size_t(n), 'I')] += -t.coeff / dv.lambda;
  }
  for (const PauliTerm& t : dv.psi.terms()) {
    if (t.coeff == 0.0) continue;
    gen[std::string(size_t(n), 'I') + t.string.str()] += t.coeff / dv.lambda;
  }

  // truncated Taylor series of exp(gen)
  std::map<std::string, double> series{{id2n, 1.0}};
  std::map<std::string, double> power{{id2n, 1.0}};
  for (int k = 1; k <= taylor_order; ++k) {
    std::map<std::string, cplx> next;
    for (const auto& [sa, ca] : power)
      for (const auto& [sb, cb] : gen) {
        auto [phase, prod] = pauli_product(PauliString(sa), PauliString(sb));
        next[prod.str()] += phase * (ca * cb / double(k));
      }
    power.clear();
    for (const auto& [s, c] : next) {
      if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c.real())))
        throw std::runtime_error("hermitian power developed an imaginary coefficient");
      if (c.real() != 0.0) power[s] = c.real();
    }
    for (const auto& [s, c] : power) series[s] += c;
  }

  // sandwich by exp(-C/2l) = (1 + c/2) - (c/2) SWAP on both sides
  const double c = std::expm1(-0.5 / dv.lambda);
  const double wa = 1.0 + 0.5 * c;
  const double wb = -0.5 * c;
  const double pref = dv.lambda / M_E;
  std::map<std::string, double> plain, swapped;
  for (const auto& [s, m] : series) {
    const std::string sw = swapped_halves(s);
    plain[s] += pref * wa * wa * m;
    plain[sw] += pref * wb * wb * m;
    swapped[s] += pref * wa * wb * m;
    swapped[sw] += pref * wa * wb * m;
  }

  RegularizerForm out;
  out.taylor_order = taylor_order;
  out.qubits = n;
  double nrm = spectral_norm_of_argument(dv);
  out.truncation_bound =
      nrm > 0.0
          ? pref * std::exp(double(taylor_order + 1) * std::log(nrm) + nrm -
                            std::lgamma(double(taylor_order + 2)))
          : 0.0;
  for (const auto& [s, coeff] : plain)
    if (coeff != 0.0) out.terms.push_back({coeff, false, PauliString(s)});
  for (const auto& [s, coeff] : swapped)
    if (coeff != 0.0) out.terms.push_back({coeff, true, PauliString(s)});
  return out;
}

Matrix RegularizerForm::dense() const {
  Eigen::Index d = Eigen::Index(1) << qubits;
  Matrix out = Matrix::Zero(d * d, d * d);
  Matrix swap = swap_operator(d);
  for (const RegularizerTerm& t : terms) {
    Matrix s = t.string.matrix();
    if (t.with_swap)
      out += t.coeff * (swap * s);
    else
      out += t.coeff * s;
  }
  return out;
}

Matrix regularizer_dense(const DualVariables& dv, RegMode mode, int taylor_order) {
  switch (mode) {
    case RegMode::exact:
      return regularizer_exact(dv);
    case RegMode::relaxed:
      return (dv.lambda / M_E) * regularizer_relaxed(dv);
    case RegMode::pauli_decomposed:
      return decompose_regularizer(dv, taylor_order).dense();
  }
  throw std::logic_error("unreachable regularizer mode");
}

double gan_loss(const DensityMatrix& P, const DensityMatrix& Q, const DualVariables& dv,
                RegMode mode, int taylor_order) {
  if (P.dim() != dv.dim() || Q.dim() != dv.dim())
    throw shape_error("state dimension mismatch in loss");
  double linear = dv.psi.expectation(Q) - dv.phi.expectation(P);

  if (mode == RegMode::relaxed) {
    // Tr[(P(x)Q) E (F(x)G) E] expands into four single-register traces.
    double c = std::expm1(-0.5 / dv.lambda);
    double a = 1.0 + 0.5 * c, b = -0.5 * c;
    Matrix F = mat_exp_herm(-dv.phi.matrix() / dv.lambda);
    Matrix G = mat_exp_herm(dv.psi.matrix() / dv.lambda);
    const Matrix& Pm = P.matrix();
    const Matrix& Qm = Q.matrix();
    double pf = (Pm * F).trace().real(), qg = (Qm * G).trace().real();
    double pg = (Pm * G).trace().real(), qf = (Qm * F).trace().real();
    double pgqf = (Pm * G * Qm * F).trace().real();
    double pfqg = (Pm * F * Qm * G).trace().real();
    double reg = (dv.lambda / M_E) *
                 (a * a * pf * qg + a * b * (pgqf + pfqg) + b * b * pg * qf);
    return linear - reg;
  }

  Matrix xi = regularizer_dense(dv, mode, taylor_order);
  Matrix k = right_contract(xi, Q.matrix());
  double reg = (k * P.matrix()).trace().real();
  return linear - reg;
}

Matrix right_contract(const Matrix& m, const Matrix& b) {
  Eigen::Index d = b.rows();
  if (b.cols() != d || m.rows() != d * d || m.cols() != d * d)
    throw shape_error("contraction dimension mismatch");
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx sum = 0.0;
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) sum += m(i * d + k, j * d + l) * b(l, k);
      out(i, j) = sum;
    }
  return out;
}

Matrix left_contract(const Matrix& m, const Matrix& a) {
  Eigen::Index d = a.rows();
  if (a.cols() != d || m.rows() != d * d || m.cols() != d * d)
    throw shape_error("contraction dimension mismatch");
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index l = 0; l < d; ++l) {
      cplx sum = 0.0;
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) sum += m(i * d + k, j * d + l) * a(j, i);
      out(k, l) = sum;
    }
  return out;
}

Matrix dexp_herm(const EigenSystem& es, const Matrix& direction) {
  const RealVector& ev = es.values;
  Eigen::Index n = ev.size();
  if (direction.rows() != n || direction.cols() != n)
    throw shape_error("direction dimension mismatch in dexp");
  Matrix vt = es.vectors.adjoint() * direction * es.vectors;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double mean = 0.5 * (ev(i) + ev(j));
      double delta = 0.5 * (ev(i) - ev(j));
      // (e^a - e^b)/(a - b) = e^mean * sinh(delta)/delta, stable near a = b;
      // for well-separated eigenvalues the direct quotient avoids the
      // 0 * overflow the factored form produces when sinh saturates.
      double value;
      if (std::abs(delta) < 1e-5) {
        double d2 = delta * delta;
        value = std::exp(mean) * (1.0 + d2 / 6.0 * (1.0 + d2 / 20.0));
      } else if (std::abs(delta) < 30.0) {
        value = std::exp(mean) * (std::sinh(delta) / delta);
      } else {
        value = (std::exp(ev(i)) - std::exp(ev(j))) / (ev(i) - ev(j));
      }
      vt(i, j) *= value;
    }
  return es.vectors * vt * es.vectors.adjoint();
}

Matrix dexp_herm(const Matrix& h, const Matrix& direction) {
  return dexp_herm(herm_eig(h), direction);
}

}  // namespace qwgan
