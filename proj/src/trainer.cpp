#include "qwgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

namespace qwgan {

double noisy_expectation(double value, double sigma, std::mt19937_64& rng) {
  if (sigma < 0.0) throw std::invalid_argument("noise level must be non-negative");
  if (sigma == 0.0) return value;
  std::normal_distribution<double> dist(0.0, sigma);
  return value + dist(rng);
}

namespace {

constexpr double kEuler = 2.718281828459045235360287471352662498;

// Dense artifacts of the regularizer at one discriminator setting.
struct RegArtifacts {
  double lambda = 0.0;
  double pref = 0.0;  // lambda / e
  Matrix phi_dense;
  Matrix psi_dense;
  Matrix KQ;  // right-contraction of the (prefactored) regularizer with Q
  // exact / pauli_decomposed
  Matrix xi;
  std::optional<EigenSystem> arg_eig;  // exponent / lambda, exact mode
  // relaxed (also backs frechet gradients in decomposed mode)
  Matrix F, G;
  double ca = 0.0, cb = 0.0;  // exp(-C/2l) = ca*I + cb*SWAP
  std::optional<EigenSystem> mphi_eig, psi_eig;
  std::optional<RegularizerForm> form;  // decomposed mode, term-resolved noise
};

Matrix exp_from_eig(const EigenSystem& es, double scale) {
  Matrix d = es.values.array().exp().matrix().asDiagonal();
  return scale * (es.vectors * d * es.vectors.adjoint());
}

void build_relaxed_pieces(RegArtifacts& ra, const DualVariables& dv) {
  const double l = dv.lambda;
  ra.mphi_eig = herm_eig(-ra.phi_dense / l);
  ra.psi_eig = herm_eig(ra.psi_dense / l);
  ra.F = exp_from_eig(*ra.mphi_eig, 1.0);
  ra.G = exp_from_eig(*ra.psi_eig, 1.0);
  const double c = std::exp(-1.0 / (2.0 * l)) - 1.0;
  ra.ca = 1.0 + c / 2.0;
  ra.cb = -c / 2.0;
}

Matrix relaxed_right_contraction(const RegArtifacts& ra, const Matrix& Qm) {
  const double a = ra.ca, b = ra.cb;
  const double qg = (Qm * ra.G).trace().real();
  const double qf = (Qm * ra.F).trace().real();
  Matrix m = (a * a * qg) * ra.F + (b * b * qf) * ra.G;
  m += (a * b) * (ra.G * Qm * ra.F + ra.F * Qm * ra.G);
  return ra.pref * m;
}

RegArtifacts make_artifacts(const Matrix& Qm, const DualVariables& dv, RegMode mode,
                            int taylor_order, bool need_frechet, bool term_noise) {
  RegArtifacts ra;
  ra.lambda = dv.lambda;
  ra.pref = dv.lambda / kEuler;
  ra.phi_dense = dv.phi.matrix();
  ra.psi_dense = dv.psi.matrix();
  const Eigen::Index d = ra.phi_dense.rows();
  if (Qm.rows() != d) throw shape_error("target dimension differs from discriminator");
  switch (mode) {
    case RegMode::exact: {
      if (dv.qubits() > 6)
        throw std::invalid_argument("exact regularizer limited to 6 qubits per side");
      Matrix id = Matrix::Identity(d, d);
      Matrix arg = (-cost_matrix(d) - kron(ra.phi_dense, id) + kron(id, ra.psi_dense)) /
                   dv.lambda;
      if (need_frechet) {
        ra.arg_eig = herm_eig(arg);
        ra.xi = exp_from_eig(*ra.arg_eig, ra.pref);
      } else {
        ra.xi = ra.pref * mat_exp_herm(arg);
      }
      ra.KQ = right_contract(ra.xi, Qm);
      break;
    }
    case RegMode::pauli_decomposed: {
      RegularizerForm form = decompose_regularizer(dv, taylor_order);
      ra.xi = form.dense();
      ra.KQ = right_contract(ra.xi, Qm);
      if (term_noise) ra.form = std::move(form);
      if (need_frechet) build_relaxed_pieces(ra, dv);
      break;
    }
    case RegMode::relaxed: {
      build_relaxed_pieces(ra, dv);
      ra.KQ = relaxed_right_contraction(ra, Qm);
      break;
    }
  }
  return ra;
}

// Decomposed-mode term split on the doubled register, with per-term caches.
struct TermSplit {
  double coeff;
  bool with_swap;
  PauliString a;  // left register
  PauliString b;  // right register
  double trQB;    // Tr[Q b], plain terms only
};

std::vector<TermSplit> split_terms(const RegularizerForm& form, const Matrix& Qm) {
  std::vector<TermSplit> out;
  out.reserve(form.terms.size());
  const int n = form.qubits;
  for (const auto& t : form.terms) {
    const auto& ls = t.string.letters();
    std::vector<PauliLetter> la(ls.begin(), ls.begin() + n);
    std::vector<PauliLetter> lb(ls.begin() + n, ls.end());
    TermSplit s{t.coeff, t.with_swap, PauliString(std::move(la)), PauliString(std::move(lb)),
                0.0};
    if (!t.with_swap) s.trQB = s.b.trace_with(Qm).real();
    out.push_back(std::move(s));
  }
  return out;
}

// Everything needed to evaluate the loss and its generator gradients once.
struct EvalContext {
  const GeneratorEnsemble* gen = nullptr;
  const DensityMatrix* target = nullptr;
  const DualVariables* dv = nullptr;
  RegMode mode = RegMode::exact;
  Meter meter;

  RealVector p;
  std::vector<Vector> states;
  Matrix Pd;
  Matrix Qm;
  RegArtifacts ra;
  std::vector<TermSplit> terms;  // decomposed mode with active meter
};

EvalContext make_context(const GeneratorEnsemble& gen, const DensityMatrix& target,
                         const DualVariables& dv, RegMode mode, int taylor_order,
                         const Meter& meter, bool need_frechet) {
  if (gen.qubits() != dv.qubits())
    throw shape_error("generator and discriminator qubit counts differ");
  if (target.dim() != gen.dim())
    throw shape_error("target dimension differs from generator");
  EvalContext ctx;
  ctx.gen = &gen;
  ctx.target = &target;
  ctx.dv = &dv;
  ctx.mode = mode;
  ctx.meter = meter;
  ctx.p = gen.probabilities();
  ctx.states = gen.member_states();
  ctx.Qm = target.matrix();
  const Eigen::Index d = gen.dim();
  ctx.Pd = Matrix::Zero(d, d);
  for (int i = 0; i < gen.rank(); ++i)
    ctx.Pd += ctx.p[i] * (ctx.states[size_t(i)] * ctx.states[size_t(i)].adjoint());
  const bool term_noise = meter.active() && mode == RegMode::pauli_decomposed;
  ctx.ra = make_artifacts(ctx.Qm, dv, mode, taylor_order, need_frechet, term_noise);
  if (ctx.ra.form) ctx.terms = split_terms(*ctx.ra.form, ctx.Qm);
  return ctx;
}

// sum_k alpha_k <A_k>_v, one meter read per string when noise is on.
double member_phi_part(const EvalContext& ctx, const Vector& v) {
  if (!ctx.meter.active()) return v.dot(ctx.ra.phi_dense * v).real();
  double s = 0.0;
  for (const auto& t : ctx.dv->phi.terms())
    s += t.coeff * ctx.meter.read(t.string.expectation(v));
  return s;
}

// Tr[(vv' (x) Q) Xi], term-resolved in decomposed mode when noise is on.
double member_reg_part(const EvalContext& ctx, const Vector& v) {
  if (!ctx.terms.empty()) {
    double s = 0.0;
    Vector w(v.size()), z(v.size());
    for (const auto& t : ctx.terms) {
      double val;
      if (!t.with_swap) {
        val = t.a.expectation(v) * t.trQB;
      } else {
        // Tr[(vv' (x) Q) SWAP (A (x) B)] = <Bv, Q A v>
        t.a.apply(v, w);
        t.b.apply(v, z);
        val = z.dot(ctx.Qm * w).real();
      }
      s += t.coeff * ctx.meter.read(val);
    }
    return s;
  }
  return ctx.meter.read(v.dot(ctx.ra.KQ * v).real());
}

double target_psi_part(const EvalContext& ctx) {
  if (!ctx.meter.active()) return (ctx.Qm * ctx.ra.psi_dense).trace().real();
  double s = 0.0;
  for (const auto& t : ctx.dv->psi.terms())
    s += t.coeff * ctx.meter.read(t.string.expectation(ctx.Qm));
  return s;
}

double loss_from(const EvalContext& ctx) {
  double out = target_psi_part(ctx);
  for (int i = 0; i < ctx.gen->rank(); ++i) {
    const Vector& v = ctx.states[size_t(i)];
    out -= ctx.p[i] * (member_phi_part(ctx, v) + member_reg_part(ctx, v));
  }
  return out;
}

RealVector logits_grad_from(const EvalContext& ctx) {
  const int r = ctx.gen->rank();
  RealVector s(r);
  for (int i = 0; i < r; ++i) {
    const Vector& v = ctx.states[size_t(i)];
    s[i] = -(member_phi_part(ctx, v) + member_reg_part(ctx, v));
  }
  const double mean = ctx.p.dot(s);
  RealVector out(r);
  for (int a = 0; a < r; ++a) out[a] = ctx.p[a] * (s[a] - mean);
  return out;
}

Vector apply_suffix(const Circuit& c, size_t from, Vector v) {
  Vector tmp(v.size());
  for (size_t l = from; l < c.size(); ++l) {
    c.gates()[l].apply(v, tmp, c.qubits());
    std::swap(v, tmp);
  }
  return v;
}

// 2 Re <u| M |du> summed per phi string (metered) or fused against a dense M.
double phi_pair_part(const EvalContext& ctx, const Vector& u, const Vector& du) {
  if (!ctx.meter.active()) return 2.0 * (ctx.ra.phi_dense * u).dot(du).real();
  double s = 0.0;
  Vector w(u.size());
  for (const auto& t : ctx.dv->phi.terms()) {
    t.string.apply(du, w);
    s += t.coeff * ctx.meter.read(2.0 * u.dot(w).real());
  }
  return s;
}

double reg_pair_part(const EvalContext& ctx, const Vector& u, const Vector& du) {
  return ctx.meter.read(2.0 * (ctx.ra.KQ * u).dot(du).real());
}

std::vector<RealVector> angles_grad_from(const EvalContext& ctx) {
  const auto& gen = *ctx.gen;
  const int n = gen.qubits();
  std::vector<RealVector> out;
  out.reserve(size_t(gen.rank()));
  for (int i = 0; i < gen.rank(); ++i) {
    const Circuit& c = gen.circuit(i);
    const size_t m = c.size();
    std::vector<Vector> fwd(m + 1);
    fwd[0] = gen.initial_state().amplitudes();
    Vector tmp(c.dim());
    for (size_t k = 0; k < m; ++k) {
      c.gates()[k].apply(fwd[k], tmp, n);
      fwd[k + 1] = tmp;
    }
    const Vector& u = fwd[m];
    RealVector g(m);
    for (size_t j = 0; j < m; ++j) {
      PauliString ax = c.gates()[j].embedded_axis(n);
      ax.apply(fwd[j + 1], tmp);
      Vector du = apply_suffix(c, j + 1, cplx(0.0, 0.5) * tmp);
      g[long(j)] = -ctx.p[i] * (phi_pair_part(ctx, u, du) + reg_pair_part(ctx, u, du));
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<RealVector> angles_shift_from(const EvalContext& ctx) {
  const auto& gen = *ctx.gen;
  std::vector<RealVector> out;
  out.reserve(size_t(gen.rank()));
  const double half_pi = std::acos(0.0);
  for (int i = 0; i < gen.rank(); ++i) {
    Circuit c = gen.circuit(i);
    RealVector g(c.size());
    for (size_t j = 0; j < c.size(); ++j) {
      const double saved = c.angle(j);
      double h[2];
      const double shifts[2] = {half_pi, -half_pi};
      for (int s = 0; s < 2; ++s) {
        c.set_angle(j, saved + shifts[s]);
        Vector v = c.apply(gen.initial_state().amplitudes());
        h[s] = -(member_phi_part(ctx, v) + member_reg_part(ctx, v));
      }
      c.set_angle(j, saved);
      g[long(j)] = ctx.p[i] * (h[0] - h[1]) / 2.0;
    }
    out.push_back(std::move(g));
  }
  return out;
}

DiscriminatorGradient disc_grad(const Matrix& Pd, const Matrix& Qm,
                                const DualVariables& dv, const RegArtifacts& ra,
                                RegMode mode, DiscGradMethod method, const Meter& meter) {
  const auto& phi = dv.phi;
  const auto& psi = dv.psi;
  DiscriminatorGradient out;
  out.alpha = RealVector::Zero(long(phi.size()));
  out.beta = RealVector::Zero(long(psi.size()));
  const double inv_e = 1.0 / kEuler;

  if (method == DiscGradMethod::frechet_exact) {
    if (mode == RegMode::exact) {
      Matrix gd = dexp_herm(*ra.arg_eig, kron(Pd, Qm));
      const Eigen::Index d = Pd.rows();
      Matrix gx = partial_trace(gd, TraceSide::right, d, d);
      Matrix gy = partial_trace(gd, TraceSide::left, d, d);
      for (size_t k = 0; k < phi.size(); ++k) {
        const auto& s = phi.terms()[k].string;
        out.alpha[long(k)] = -meter.read(s.expectation(Pd)) +
                             meter.read(inv_e * s.trace_with(gx).real());
      }
      for (size_t l = 0; l < psi.size(); ++l) {
        const auto& s = psi.terms()[l].string;
        out.beta[long(l)] = meter.read(s.expectation(Qm)) -
                            meter.read(inv_e * s.trace_with(gy).real());
      }
      return out;
    }
    // relaxed closed form; decomposed mode borrows it (they differ only by
    // the Taylor truncation of the middle factor).
    const double a = ra.ca, b = ra.cb;
    const Matrix& F = ra.F;
    const Matrix& G = ra.G;
    const double qg = (Qm * G).trace().real();
    const double qf = (Qm * F).trace().real();
    const double pf = (Pd * F).trace().real();
    const double pg = (Pd * G).trace().real();
    Matrix sf = (a * a * qg) * Pd + (a * b) * (Pd * G * Qm + Qm * G * Pd) +
                (b * b * pg) * Qm;
    Matrix sg = (a * a * pf) * Qm + (a * b) * (Qm * F * Pd + Pd * F * Qm) +
                (b * b * qf) * Pd;
    Matrix df = dexp_herm(*ra.mphi_eig, sf);
    Matrix dg = dexp_herm(*ra.psi_eig, sg);
    for (size_t k = 0; k < phi.size(); ++k) {
      const auto& s = phi.terms()[k].string;
      out.alpha[long(k)] = -meter.read(s.expectation(Pd)) +
                           meter.read(inv_e * s.trace_with(df).real());
    }
    for (size_t l = 0; l < psi.size(); ++l) {
      const auto& s = psi.terms()[l].string;
      out.beta[long(l)] = meter.read(s.expectation(Qm)) -
                          meter.read(inv_e * s.trace_with(dg).real());
    }
    return out;
  }

  // commuting_form: the direction multiplies the fixed regularizer.
  const double inv_l = 1.0 / dv.lambda;
  if (mode == RegMode::relaxed) {
    const double a = ra.ca, b = ra.cb;
    const Matrix& F = ra.F;
    const Matrix& G = ra.G;
    const double qg = (Qm * G).trace().real();
    const double qf = (Qm * F).trace().real();
    const double pf = (Pd * F).trace().real();
    const double pg = (Pd * G).trace().real();
    Matrix w1 = F * Pd;
    Matrix w2 = G * Qm * F * Pd;
    Matrix w3 = F * Qm * G * Pd;
    Matrix w4 = G * Pd;
    Matrix v1 = G * Qm;
    Matrix v2 = F * Pd * G * Qm;
    Matrix v3 = G * Pd * F * Qm;
    Matrix v4 = F * Qm;
    for (size_t k = 0; k < phi.size(); ++k) {
      const auto& s = phi.terms()[k].string;
      const double reg = ra.pref * (a * a * qg * s.trace_with(w1).real() +
                                    a * b * (s.trace_with(w2).real() + s.trace_with(w3).real()) +
                                    b * b * qf * s.trace_with(w4).real());
      out.alpha[long(k)] =
          -meter.read(s.expectation(Pd)) + inv_l * meter.read(reg);
    }
    for (size_t l = 0; l < psi.size(); ++l) {
      const auto& s = psi.terms()[l].string;
      const double reg = ra.pref * (a * a * pf * s.trace_with(v1).real() +
                                    a * b * (s.trace_with(v2).real() + s.trace_with(v3).real()) +
                                    b * b * pg * s.trace_with(v4).real());
      out.beta[long(l)] =
          meter.read(s.expectation(Qm)) - inv_l * meter.read(reg);
    }
    return out;
  }
  Matrix wa = ra.KQ * Pd;
  Matrix wb = left_contract(ra.xi, Pd) * Qm;
  for (size_t k = 0; k < phi.size(); ++k) {
    const auto& s = phi.terms()[k].string;
    out.alpha[long(k)] = -meter.read(s.expectation(Pd)) +
                         inv_l * meter.read(s.trace_with(wa).real());
  }
  for (size_t l = 0; l < psi.size(); ++l) {
    const auto& s = psi.terms()[l].string;
    out.beta[long(l)] = meter.read(s.expectation(Qm)) -
                        inv_l * meter.read(s.trace_with(wb).real());
  }
  return out;
}

}  // namespace

double training_loss(const GeneratorEnsemble& gen, const DensityMatrix& target,
                     const DualVariables& dv, RegMode mode, int taylor_order,
                     const Meter& meter) {
  EvalContext ctx = make_context(gen, target, dv, mode, taylor_order, meter, false);
  return loss_from(ctx);
}

RealVector grad_logits(const GeneratorEnsemble& gen, const DensityMatrix& target,
                       const DualVariables& dv, RegMode mode, int taylor_order,
                       const Meter& meter) {
  EvalContext ctx = make_context(gen, target, dv, mode, taylor_order, meter, false);
  return logits_grad_from(ctx);
}

std::vector<RealVector> grad_angles_exact(const GeneratorEnsemble& gen,
                                          const DensityMatrix& target,
                                          const DualVariables& dv, RegMode mode,
                                          int taylor_order, const Meter& meter) {
  EvalContext ctx = make_context(gen, target, dv, mode, taylor_order, meter, false);
  return angles_grad_from(ctx);
}

std::vector<RealVector> grad_angles_shift(const GeneratorEnsemble& gen,
                                          const DensityMatrix& target,
                                          const DualVariables& dv, RegMode mode,
                                          int taylor_order, const Meter& meter) {
  EvalContext ctx = make_context(gen, target, dv, mode, taylor_order, meter, false);
  return angles_shift_from(ctx);
}

DiscriminatorGradient grad_discriminator(const DensityMatrix& generated,
                                         const DensityMatrix& target,
                                         const DualVariables& dv, DiscGradMethod method,
                                         RegMode mode, int taylor_order,
                                         const Meter& meter) {
  if (generated.dim() != dv.dim() || target.dim() != dv.dim())
    throw shape_error("state dimension differs from discriminator");
  const bool need_frechet = method == DiscGradMethod::frechet_exact;
  RegArtifacts ra =
      make_artifacts(target.matrix(), dv, mode, taylor_order, need_frechet, false);
  return disc_grad(generated.matrix(), target.matrix(), dv, ra, mode, method, meter);
}

int epochs_to_fidelity(const RunHistory& history, double threshold) {
  for (const auto& r : history.records)
    if (r.fidelity >= threshold) return r.epoch;
  return -1;
}

RunHistory train(const TrainingConfig& config, const DensityMatrix& target) {
  if (config.epochs < 1) throw std::invalid_argument("epoch count must be positive");
  if (config.rank < 1) throw std::invalid_argument("ensemble rank must be positive");
  if (config.disc_steps < 0)
    throw std::invalid_argument("discriminator step count must be non-negative");
  const Layout& layout = config.layout;
  const int n = layout.qubits;
  if (target.dim() != (Eigen::Index(1) << n))
    throw shape_error("target dimension differs from layout register");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * std::acos(0.0) * 2.0);

  PureState initial =
      config.initial_state ? *config.initial_state : all_zeros_state(n);
  std::vector<Circuit> circuits;
  circuits.reserve(size_t(config.rank));
  for (int i = 0; i < config.rank; ++i) {
    RealVector a(layout.parameter_count());
    for (long j = 0; j < a.size(); ++j) a[j] = uang(rng);
    circuits.push_back(layout.instantiate(a));
  }
  GeneratorEnsemble gen(std::move(circuits), RealVector::Zero(config.rank), initial);

  std::vector<PauliString> strings = config.disc_weight_cap < 0
                                         ? pauli_basis(n)
                                         : pauli_basis_bounded(n, config.disc_weight_cap);
  PauliObservable phi(n), psi(n);
  for (const auto& s : strings) {
    phi.add_term(0.0, s);
    psi.add_term(0.0, s);
  }
  DualVariables dv(phi, psi, config.lambda);

  Meter meter(config.sigma, config.sigma > 0.0 ? &rng : nullptr);
  Meter grad_meter = config.noisy_gradients ? meter : Meter();

  RunHistory hist;
  hist.disc_strings = strings;
  const auto t0 = std::chrono::steady_clock::now();
  const bool frechet = config.disc_method == DiscGradMethod::frechet_exact;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EvalContext ctx = make_context(gen, target, dv, config.reg_mode, config.taylor_order,
                                   meter, frechet && config.disc_steps > 0);
    const double loss = loss_from(ctx);
    if (!std::isfinite(loss))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
    const double fid = fidelity(gen.state(), target);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    hist.records.push_back({epoch, loss, fid, ms});
    if (config.stop_fidelity > 0.0 && fid >= config.stop_fidelity) {
      hist.reached_stop = true;
      break;
    }

    for (int s = 0; s < config.disc_steps; ++s) {
      if (s > 0)
        ctx = make_context(gen, target, dv, config.reg_mode, config.taylor_order, meter,
                           frechet);
      DiscriminatorGradient dg = disc_grad(ctx.Pd, ctx.Qm, dv, ctx.ra, config.reg_mode,
                                           config.disc_method, grad_meter);
      for (size_t k = 0; k < dv.phi.size(); ++k)
        dv.phi.set_coeff(k, dv.phi.coeff(k) + config.eta_disc * dg.alpha[long(k)]);
      for (size_t l = 0; l < dv.psi.size(); ++l)
        dv.psi.set_coeff(l, dv.psi.coeff(l) + config.eta_disc * dg.beta[long(l)]);
    }

    if (config.disc_steps > 0)
      ctx = make_context(gen, target, dv, config.reg_mode, config.taylor_order, meter,
                         false);
    RealVector gl = logits_grad_from(ctx);
    std::vector<RealVector> ga = angles_grad_from(ctx);
    bool finite = gl.allFinite();
    for (const auto& g : ga) finite = finite && g.allFinite();
    if (!finite)
      throw std::runtime_error("gradient diverged at epoch " + std::to_string(epoch));
    gen.set_logits(gen.logits() - config.eta_logits * gl);
    for (int i = 0; i < gen.rank(); ++i)
      gen.circuit(i).set_angles(gen.circuit(i).angles() - config.eta_angles * ga[size_t(i)]);
  }

  hist.epochs_run = int(hist.records.size());
  hist.final_fidelity = fidelity(gen.state(), target);
  hist.logits = gen.logits();
  for (int i = 0; i < gen.rank(); ++i) hist.angles.push_back(gen.circuit(i).angles());
  hist.alpha = RealVector(long(dv.phi.size()));
  hist.beta = RealVector(long(dv.psi.size()));
  for (size_t k = 0; k < dv.phi.size(); ++k) hist.alpha[long(k)] = dv.phi.coeff(k);
  for (size_t l = 0; l < dv.psi.size(); ++l) hist.beta[long(l)] = dv.psi.coeff(l);
  return hist;
}

void write_history_csv(const RunHistory& history, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "epoch,loss,fidelity,wall_ms\n";
  char buf[128];
  for (const auto& r : history.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%lld\n", r.epoch, r.loss, r.fidelity,
                  static_cast<long long>(r.wall_ms));
    os << buf;
  }
}

void write_parameters(const RunHistory& history, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[160];
  for (long i = 0; i < history.logits.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "logit %ld %.17g\n", i, history.logits[i]);
    os << buf;
  }
  for (size_t i = 0; i < history.angles.size(); ++i)
    for (long j = 0; j < history.angles[i].size(); ++j) {
      std::snprintf(buf, sizeof(buf), "angle %zu %ld %.17g\n", i, j, history.angles[i][j]);
      os << buf;
    }
  for (size_t k = 0; k < history.disc_strings.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "alpha %s %.17g\n", history.disc_strings[k].str().c_str(),
                  history.alpha[long(k)]);
    os << buf;
  }
  for (size_t l = 0; l < history.disc_strings.size(); ++l) {
    std::snprintf(buf, sizeof(buf), "beta %s %.17g\n", history.disc_strings[l].str().c_str(),
                  history.beta[long(l)]);
    os << buf;
  }
}

DualAscentResult maximize_dual(const DensityMatrix& generated, const DensityMatrix& target,
                               double lambda, const DualAscentOptions& options) {
  const Eigen::Index d = generated.dim();
  if (target.dim() != d) throw shape_error("state dimensions differ");
  int n = 0;
  while ((Eigen::Index(1) << n) < d) ++n;
  if ((Eigen::Index(1) << n) != d) throw shape_error("dimension is not a power of two");

  std::vector<PauliString> strings = pauli_basis(n);
  PauliObservable phi(n), psi(n);
  for (const auto& s : strings) {
    phi.add_term(0.0, s);
    psi.add_term(0.0, s);
  }
  if (options.initial) {
    if (options.initial->phi.size() != strings.size() ||
        options.initial->psi.size() != strings.size() ||
        options.initial->qubits() != n)
      throw shape_error("warm start must use the full string basis of the register");
    for (size_t k = 0; k < strings.size(); ++k) {
      phi.set_coeff(k, options.initial->phi.coeff(k));
      psi.set_coeff(k, options.initial->psi.coeff(k));
    }
  }
  DualVariables dv(phi, psi, lambda);
  const long K = long(strings.size());

  auto pack = [&](const DualVariables& v) {
    RealVector x(2 * K);
    for (long k = 0; k < K; ++k) {
      x[k] = v.phi.coeff(size_t(k));
      x[K + k] = v.psi.coeff(size_t(k));
    }
    return x;
  };
  auto unpack = [&](const RealVector& x, DualVariables& v) {
    for (long k = 0; k < K; ++k) {
      v.phi.set_coeff(size_t(k), x[k]);
      v.psi.set_coeff(size_t(k), x[K + k]);
    }
  };

  // Shifting psi by -s*1 moves the objective by -s and rescales the penalty
  // Tr[(P (x) Q) e^{M/lambda}] by e^{-s/lambda}; the optimal shift has the
  // closed form s = lambda*(log Tr[(P (x) Q) e^{M/lambda}] - 1), which pins
  // the penalty term at exactly lambda.  Applying it after every accepted
  // step keeps the iterates out of the overflow region and removes the
  // stiffest coordinate from the line search.
  const Matrix Cd = cost_matrix(d);
  const Matrix id = Matrix::Identity(d, d);
  const Matrix PQ = kron(generated.matrix(), target.matrix());
  auto rebalance = [&](RealVector& x) {
    unpack(x, dv);
    Matrix m = -Cd - kron(dv.phi.matrix(), id) + kron(id, dv.psi.matrix());
    EigenSystem mes = herm_eig(m);
    double top = -std::numeric_limits<double>::infinity();
    RealVector w(mes.values.size());
    for (long i = 0; i < mes.values.size(); ++i) {
      w[i] = std::max(0.0, (mes.vectors.col(i).adjoint() * PQ * mes.vectors.col(i))(0).real());
      if (w[i] > 0.0) top = std::max(top, mes.values[i] / lambda);
    }
    if (!std::isfinite(top)) return;
    double acc = 0.0;
    for (long i = 0; i < mes.values.size(); ++i)
      if (w[i] > 0.0) acc += w[i] * std::exp(mes.values[i] / lambda - top);
    x[K] -= lambda * (top + std::log(acc) - 1.0);
  };

  // Minimize f = -loss with L-BFGS (two-loop recursion, Armijo backtracking).
  auto feval = [&](const RealVector& x) {
    unpack(x, dv);
    return -gan_loss(generated, target, dv, RegMode::exact);
  };
  auto geval = [&](const RealVector& x) {
    unpack(x, dv);
    DiscriminatorGradient g =
        grad_discriminator(generated, target, dv, options.method, RegMode::exact);
    RealVector out(2 * K);
    out.head(K) = -g.alpha;
    out.tail(K) = -g.beta;
    return out;
  };

  RealVector x = pack(dv);
  rebalance(x);
  double f = feval(x);
  RealVector g = geval(x);

  const int memory = 12;
  std::deque<RealVector> ss, ys;
  std::deque<double> rhos;
  double best = -f;
  RealVector best_x = x;
  double window_best = best;
  int since_window = 0;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() < 1e-11) break;

    RealVector q = g;
    std::vector<double> alpha_ls(ss.size());
    for (long i = long(ss.size()) - 1; i >= 0; --i) {
      alpha_ls[size_t(i)] = rhos[size_t(i)] * ss[size_t(i)].dot(q);
      q -= alpha_ls[size_t(i)] * ys[size_t(i)];
    }
    if (!ss.empty()) {
      const double gamma = ss.back().dot(ys.back()) / ys.back().squaredNorm();
      q *= gamma;
    } else {
      q *= options.learning_rate;
    }
    for (size_t i = 0; i < ss.size(); ++i)
      q += (alpha_ls[i] - rhos[i] * ys[i].dot(q)) * ss[i];
    RealVector dir = -q;
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      dir = -options.learning_rate * g;
      slope = g.dot(dir);
    }

    double t = 1.0;
    RealVector xn;
    double fn = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * dir;
      fn = feval(xn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    rebalance(xn);
    fn = feval(xn);

    RealVector gn = geval(xn);
    RealVector s = xn - x;
    RealVector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      ss.push_back(std::move(s));
      ys.push_back(std::move(y));
      rhos.push_back(1.0 / sy);
      if (long(ss.size()) > memory) {
        ss.pop_front();
        ys.pop_front();
        rhos.pop_front();
      }
    }
    x = std::move(xn);
    f = fn;
    g = std::move(gn);
    if (-f > best) {
      best = -f;
      best_x = x;
    }
    if (++since_window >= options.window) {
      if (best - window_best < options.tolerance) break;
      window_best = best;
      since_window = 0;
    }
  }
  unpack(best_x, dv);
  return DualAscentResult{std::move(dv), best, it};
}

}  // namespace qwgan
