// Acceptance gate: one pass/fail line per criterion, tolerances pinned below.
// Criteria marked long are skipped unless --long is given.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qwgan/experiment.hpp"

using namespace qwgan;

namespace {

int g_failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return std::string(buf);
}

void line(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void skip_line(int idx, const char* name) {
  std::printf("[SKIP] criterion %d: %s (long run; pass --long)\n", idx, name);
  std::fflush(stdout);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

DensityMatrix sample_density(Eigen::Index dim, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rank(1, int(dim));
  return random_density(dim, rank(rng), rng);
}

DualVariables random_full_dual(int n, double lambda, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PauliObservable phi(n), psi(n);
  for (const PauliString& s : pauli_basis(n)) {
    phi.add_term(u(rng), s);
    psi.add_term(u(rng), s);
  }
  return DualVariables(std::move(phi), std::move(psi), lambda);
}

GeneratorEnsemble random_ensemble(const Layout& layout, int rank, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> ulog(-1.0, 1.0);
  std::vector<Circuit> circuits;
  RealVector logits(rank);
  for (int i = 0; i < rank; ++i) {
    RealVector a(layout.parameter_count());
    for (long j = 0; j < a.size(); ++j) a[j] = uang(rng);
    circuits.push_back(layout.instantiate(a));
    logits[i] = ulog(rng);
  }
  return GeneratorEnsemble(std::move(circuits), std::move(logits));
}

// ---------------------------------------------------------------- criterion 1

void criterion_1() {
  constexpr double kNegTol = -1e-6, kSymTol = 1e-5, kSelfTol = 1e-5;
  constexpr double kSepDist = 0.1, kSepValue = 1e-4;
  constexpr double kBudget = 300.0;
  Timer t;
  std::mt19937_64 rng(101);

  double min_value = 1e30, worst_asym = 0.0, worst_self = 0.0, min_sep = 1e30;
  int separated = 0;
  for (int i = 0; i < 70; ++i) {
    const Eigen::Index d = i < 50 ? 2 : 4;
    DensityMatrix P = sample_density(d, rng);
    DensityMatrix Q = sample_density(d, rng);
    const double pq = qw_primal({P, Q}).value;
    const double qp = qw_primal({Q, P}).value;
    const double self = qw_primal({P, P}).value;
    min_value = std::min({min_value, pq, qp});
    worst_asym = std::max(worst_asym, std::abs(pq - qp));
    worst_self = std::max(worst_self, std::abs(self));
    if (trace_distance(P, Q) > kSepDist) {
      ++separated;
      min_sep = std::min(min_sep, pq);
    }
  }
  const double el = t.s();
  const bool pass = min_value >= kNegTol && worst_asym <= kSymTol &&
                    worst_self <= kSelfTol && separated > 0 && min_sep > kSepValue &&
                    el <= kBudget;
  line(1, "semimetric axioms on 70 random density pairs", pass,
       fmt("min value %.3g, worst asymmetry %.3g, worst self-distance %.3g, "
           "min separated value %.3g over %d pairs, %.1f s",
           min_value, worst_asym, worst_self, min_sep, separated, el));
}

// ---------------------------------------------------------------- criterion 2

void criterion_2() {
  constexpr double kTol = 1e-4, kBudget = 120.0;
  Timer t;
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    const Eigen::Index d = i < 15 ? 2 : 4;
    PureState u = random_pure_state(d, rng), v = random_pure_state(d, rng);
    const double primal = qw_primal({u.density(), v.density()}).value;
    worst = std::max(worst, std::abs(primal - qw_pure(u, v)));
  }
  const double el = t.s();
  line(2, "pure-state closed form on 30 random pure pairs", worst <= kTol && el <= kBudget,
       fmt("worst |primal - closed| %.3g, %.1f s", worst, el));
}

// ---------------------------------------------------------------- criterion 3

void criterion_3() {
  constexpr double kMargin = 2.0 - 1e-9;
  constexpr double kWeakTol = 1e-5;
  constexpr double kMonoFloor = 1e-6;  // noise floor for near-zero gaps
  constexpr double kRelFinal = 0.05, kAbsFinal = 1e-6;
  const double lambdas[3] = {1.0, 0.1, 0.01};

  PauliObservable phi1(1), psi1(1);
  phi1.add_term(1.0, PauliString::identity(1));
  psi1.add_term(-1.0, PauliString::identity(1));
  const DualFeasibility feas = dual_feasibility(DualVariables(phi1, psi1, 1.0));
  const bool margin_ok = feas.feasible && feas.min_eigenvalue >= kMargin;

  std::mt19937_64 rng(303);
  bool weak_ok = true, mono_ok = true, final_ok = true;
  double worst_final = 0.0, worst_weak = -1e30;
  for (int i = 0; i < 10; ++i) {
    PureState u = random_pure_state(2, rng), v = random_pure_state(2, rng);
    DensityMatrix P = u.density(), Q = v.density();
    const double primal = qw_primal({P, Q}).value;

    std::optional<DualVariables> warm;
    double prev_gap = 1e30, gap = 0.0;
    for (double l : lambdas) {
      DualAscentOptions opt;
      opt.initial = warm;
      DualAscentResult res = maximize_dual(P, Q, l, opt);
      const double shifted = dual_objective(P, Q, feasibility_shift(res.dv));
      worst_weak = std::max(worst_weak, shifted - primal);
      weak_ok = weak_ok && shifted <= primal + kWeakTol;
      gap = std::abs(res.value - primal);
      mono_ok = mono_ok && gap <= prev_gap + kMonoFloor;
      prev_gap = gap;
      warm = std::move(res.dv);
    }
    final_ok = final_ok && gap <= std::max(kRelFinal * primal, kAbsFinal);
    worst_final = std::max(worst_final, gap);
  }
  line(3, "duality on 10 random single-qubit pairs",
       margin_ok && weak_ok && mono_ok && final_ok,
       fmt("strict-point margin %.10g, worst duality excess %.3g, worst final gap %.3g, "
           "monotone %s",
           feas.min_eigenvalue, worst_weak, worst_final, mono_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------- criterion 4

void criterion_4() {
  constexpr double kAbs = 1e-6, kRel = 1e-4, kShiftTol = 1e-9, kBudget = 180.0;
  constexpr double kStep = 1e-5;
  Timer t;
  const RegMode modes[3] = {RegMode::exact, RegMode::relaxed, RegMode::pauli_decomposed};

  double worst_excess = -1e30, worst_shift = 0.0;
  auto excess = [&](double a, double f) {
    return std::abs(a - f) - std::max(kAbs, kRel * std::abs(f));
  };

  for (int inst = 0; inst < 30; ++inst) {
    const int n = 1 + inst % 2;
    const int rank = 1 + (inst / 2) % 2;
    const RegMode mode = modes[inst % 3];
    std::mt19937_64 rng(4000 + inst);
    Layout layout = generic_layout(n, 2);
    GeneratorEnsemble gen = random_ensemble(layout, rank, rng);
    DensityMatrix target = random_density(Eigen::Index(1) << n, 1 + inst % 2, rng);
    DualVariables dv = random_full_dual(n, inst % 2 ? 5.0 : 2.0, 0.2, rng);

    RealVector gl = grad_logits(gen, target, dv, mode);
    for (int i = 0; i < rank; ++i) {
      GeneratorEnsemble up = gen, dn = gen;
      RealVector lu = gen.logits(), ld = gen.logits();
      lu[i] += kStep;
      ld[i] -= kStep;
      up.set_logits(lu);
      dn.set_logits(ld);
      const double fd = (training_loss(up, target, dv, mode) -
                         training_loss(dn, target, dv, mode)) /
                        (2.0 * kStep);
      worst_excess = std::max(worst_excess, excess(gl[i], fd));
    }

    std::vector<RealVector> ga = grad_angles_exact(gen, target, dv, mode);
    std::vector<RealVector> gs = grad_angles_shift(gen, target, dv, mode);
    for (int i = 0; i < rank; ++i) {
      worst_shift = std::max(worst_shift, (ga[size_t(i)] - gs[size_t(i)]).cwiseAbs().maxCoeff());
      for (long k = 0; k < ga[size_t(i)].size(); ++k) {
        GeneratorEnsemble up = gen, dn = gen;
        up.circuit(i).set_angle(size_t(k), gen.circuit(i).angle(size_t(k)) + kStep);
        dn.circuit(i).set_angle(size_t(k), gen.circuit(i).angle(size_t(k)) - kStep);
        const double fd = (training_loss(up, target, dv, mode) -
                           training_loss(dn, target, dv, mode)) /
                          (2.0 * kStep);
        worst_excess = std::max(worst_excess, excess(ga[size_t(i)][k], fd));
      }
    }

    // Frechet-exact discriminator gradients differentiate the exact and
    // relaxed losses; the decomposed mode reuses the relaxed form by design.
    if (mode != RegMode::pauli_decomposed) {
      DensityMatrix Pgen = gen.state();
      DiscriminatorGradient dg =
          grad_discriminator(Pgen, target, dv, DiscGradMethod::frechet_exact, mode);
      for (size_t k = 0; k < dv.phi.size(); ++k) {
        DualVariables up = dv, dn = dv;
        up.phi.set_coeff(k, dv.phi.coeff(k) + kStep);
        dn.phi.set_coeff(k, dv.phi.coeff(k) - kStep);
        double fd =
            (gan_loss(Pgen, target, up, mode) - gan_loss(Pgen, target, dn, mode)) /
            (2.0 * kStep);
        worst_excess = std::max(worst_excess, excess(dg.alpha[long(k)], fd));

        up = dv;
        dn = dv;
        up.psi.set_coeff(k, dv.psi.coeff(k) + kStep);
        dn.psi.set_coeff(k, dv.psi.coeff(k) - kStep);
        fd = (gan_loss(Pgen, target, up, mode) - gan_loss(Pgen, target, dn, mode)) /
             (2.0 * kStep);
        worst_excess = std::max(worst_excess, excess(dg.beta[long(k)], fd));
      }
    }
  }
  const double el = t.s();
  line(4, "gradient suite on 30 randomized instances",
       worst_excess <= 0.0 && worst_shift <= kShiftTol && el <= kBudget,
       fmt("worst tolerance excess %.3g, worst |shift - exact| %.3g, %.1f s", worst_excess,
           worst_shift, el));
}

// ---------------------------------------------------------------- criterion 5

void criterion_5() {
  constexpr double kLossTolFloor = 1e-3;
  constexpr double kClosedTol = 1e-12;
  constexpr double kFpSlack = 1e-12;
  std::mt19937_64 rng(505);

  double worst_recon_margin = -1e30;  // err - bound, must stay <= fp slack
  double worst_loss_excess = -1e30;
  for (int K : {4, 8}) {
    for (int i = 0; i < 10; ++i) {
      const int n = 1 + i % 2;
      const double lambda = i % 2 ? 10.0 : 2.0;
      DualVariables dv = random_full_dual(n, lambda, 0.15, rng);
      RegularizerForm form = decompose_regularizer(dv, K);
      const double err =
          (form.dense() - regularizer_dense(dv, RegMode::relaxed)).cwiseAbs().maxCoeff();
      worst_recon_margin = std::max(worst_recon_margin, err - form.truncation_bound);

      DensityMatrix P = sample_density(Eigen::Index(1) << n, rng);
      DensityMatrix Q = sample_density(Eigen::Index(1) << n, rng);
      const double le = gan_loss(P, Q, dv, RegMode::exact);
      const double lr = gan_loss(P, Q, dv, RegMode::relaxed);
      const double ld = gan_loss(P, Q, dv, RegMode::pauli_decomposed, K);
      const double tol = std::max(kLossTolFloor, form.truncation_bound);
      const double spread =
          std::max({std::abs(le - lr), std::abs(lr - ld), std::abs(le - ld)});
      worst_loss_excess = std::max(worst_loss_excess, spread - tol);
    }
  }

  double worst_closed = 0.0;
  for (double lambda : {0.5, 2.0, 10.0}) {
    for (int n : {1, 2}) {
      DualVariables zero(PauliObservable{n}, PauliObservable{n}, lambda);
      const Eigen::Index D = zero.dim() * zero.dim();
      Matrix want = (lambda / std::exp(1.0)) *
                    (Matrix::Identity(D, D) +
                     std::expm1(-1.0 / lambda) * cost_matrix(zero.dim()));
      worst_closed = std::max(
          worst_closed, (regularizer_exact(zero) - want).cwiseAbs().maxCoeff());
    }
  }

  line(5, "regularizer decomposition equivalence",
       worst_recon_margin <= kFpSlack && worst_loss_excess <= 0.0 &&
           worst_closed <= kClosedTol,
       fmt("worst (reconstruction - bound) %.3g, worst loss spread excess %.3g, "
           "zero-dual closed form error %.3g",
           worst_recon_margin, worst_loss_excess, worst_closed));
}

// ---------------------------------------------------------------- criterion 6

struct ConvergenceBlock {
  int reached = 0;
  int runs = 0;
  double elapsed = 0.0;
  double worst_final = 1.0;
};

ConvergenceBlock convergence_block(const Layout& layout, int rank, int target_rank,
                                   double lambda, int epochs, double threshold, int seeds,
                                   RegMode mode, double eta, int disc_cap,
                                   std::uint64_t target_seed) {
  Timer t;
  ConvergenceBlock out;
  RandomTarget target = random_target(layout, target_rank, target_seed);
  for (int s = 1; s <= seeds; ++s) {
    TrainingConfig cfg;
    cfg.layout = layout;
    cfg.rank = rank;
    cfg.lambda = lambda;
    cfg.eta_angles = cfg.eta_logits = cfg.eta_disc = eta;
    cfg.epochs = epochs;
    cfg.reg_mode = mode;
    cfg.disc_weight_cap = disc_cap;
    cfg.stop_fidelity = threshold;
    cfg.seed = std::uint64_t(s);
    RunHistory h = train(cfg, target.state);
    const bool ok = h.reached_stop || h.final_fidelity >= threshold;
    out.reached += ok ? 1 : 0;
    ++out.runs;
    if (!ok) out.worst_final = std::min(out.worst_final, h.final_fidelity);
  }
  out.elapsed = t.s();
  return out;
}

void criterion_6() {
  constexpr double kBudget1q = 60.0, kBudget4q = 1800.0;

  ConvergenceBlock b1 = convergence_block(generic_layout(1, 3), 1, 1, 2.0, 300, 0.99, 10,
                                          RegMode::exact, 0.1, -1, 12345);
  ConvergenceBlock b2 = convergence_block(generic_layout(2, 3), 1, 1, 2.0, 500, 0.99, 10,
                                          RegMode::exact, 0.1, -1, 12345);
  ConvergenceBlock bm = convergence_block(generic_layout(1, 3), 2, 2, 10.0, 400, 0.98, 10,
                                          RegMode::exact, 0.1, -1, 12345);
  ConvergenceBlock b4 = convergence_block(generic_layout(4, 3), 1, 1, 10.0, 1500, 0.99, 10,
                                          RegMode::relaxed, 0.1, -1, 12345);

  const bool pass = b1.reached >= 8 && b2.reached >= 8 && bm.reached >= 8 &&
                    b4.reached >= 7 && b1.elapsed <= kBudget1q && b4.elapsed <= kBudget4q;
  line(6, "training reproduction", pass,
       fmt("1q pure %d/10 in %.1f s, 2q pure %d/10 in %.1f s, 1q mixed %d/10 in %.1f s, "
           "4q pure %d/10 in %.1f s",
           b1.reached, b1.elapsed, b2.reached, b2.elapsed, bm.reached, bm.elapsed,
           b4.reached, b4.elapsed));
}

// ---------------------------------------------------------------- criterion 7

void criterion_7(bool long_runs) {
  if (!long_runs) {
    skip_line(7, "noise tolerance on the trapped-ion layout");
    return;
  }
  constexpr double kThreshold = 0.95;
  constexpr int kEpochs = 1500, kSeeds = 5;
  Timer t;
  Layout layout = ionq_layout(4);
  RandomTarget target = random_target(layout, 1, 12345);

  auto run_at = [&](double sigma, std::uint64_t seed) {
    TrainingConfig cfg;
    cfg.layout = layout;
    cfg.lambda = 10.0;
    cfg.epochs = kEpochs;
    cfg.reg_mode = RegMode::relaxed;
    cfg.sigma = sigma;
    cfg.stop_fidelity = kThreshold;
    cfg.seed = seed;
    // measured-form discriminator updates: noise attaches to each measured
    // trace and the 1/lambda scaling happens in post-processing
    cfg.disc_method = DiscGradMethod::commuting_form;
    return train(cfg, target.state);
  };

  int noisy_reached = 0, clean_reached = 0;
  std::vector<double> noisy_epochs, clean_epochs;
  for (int s = 1; s <= kSeeds; ++s) {
    RunHistory hn = run_at(0.1, std::uint64_t(s));
    RunHistory hc = run_at(0.0, std::uint64_t(s));
    const int en = epochs_to_fidelity(hn, kThreshold);
    const int ec = epochs_to_fidelity(hc, kThreshold);
    noisy_reached += en >= 0 ? 1 : 0;
    clean_reached += ec >= 0 ? 1 : 0;
    noisy_epochs.push_back(en >= 0 ? double(en) : double(kEpochs + 1));
    clean_epochs.push_back(ec >= 0 ? double(ec) : double(kEpochs + 1));
  }
  const double mn = median(noisy_epochs), mc = median(clean_epochs);
  const bool pass = noisy_reached >= 3 && clean_reached >= 3 && mn > mc;
  line(7, "noise tolerance on the trapped-ion layout", pass,
       fmt("sigma 0.1 reached %d/5 with median epochs %g, sigma 0 reached %d/5 with "
           "median epochs %g, %.1f s",
           noisy_reached, mn, clean_reached, mc, t.s()));
}

// ---------------------------------------------------------------- criterion 8

bool compress_reaches(const Matrix& target, const Layout& layout, double lambda,
                      RegMode mode, int disc_cap, int epochs, double stop,
                      double threshold, int max_seeds, double eta, double* best) {
  *best = 0.0;
  for (int s = 1; s <= max_seeds; ++s) {
    CompressionConfig cfg;
    cfg.layout = layout;
    cfg.lambda = lambda;
    cfg.eta_angles = cfg.eta_logits = cfg.eta_disc = eta;
    cfg.epochs = epochs;
    cfg.reg_mode = mode;
    cfg.disc_weight_cap = disc_cap;
    cfg.stop_fidelity = stop;
    cfg.seed = std::uint64_t(s);
    CompressionResult res = compress_circuit(target, cfg);
    *best = std::max(*best, res.avg_fidelity);
    if (res.avg_fidelity >= threshold) return true;
  }
  return false;
}

void criterion_8(bool long_runs) {
  const TrotterPlan p1 = trotter_plan(12, 3.0, 1e-3, 1);
  const bool counts_ok = p1.steps == 6831 && p1.gate_count == 163944 &&
                         trotter_plan(12, 3.0, 1e-3, 2).steps == 496 &&
                         trotter_plan(12, 3.0, 1e-3, 2).gate_count == 59520;

  Timer t;
  double best1 = 0.0;
  PauliObservable hx(1);
  hx.add_term(0.5, PauliString("X"));  // single rotation exp(i t X / 2) at t = 1
  const bool rot_ok = compress_reaches(exact_evolution(hx, 1.0), generic_layout(1, 1),
                                       10.0, RegMode::exact, -1, 500, 0.999, 0.999, 3,
                                       0.1, &best1);

  double best2 = 0.0;
  HeisenbergSpec spec2;
  spec2.qubits = 2;
  spec2.seed = 7;
  Layout l2 = generic_layout(2, 3);
  const bool heis_ok =
      l2.parameter_count() <= 30 &&
      compress_reaches(exact_evolution(heisenberg_hamiltonian(spec2), 1.0), l2, 10.0,
                       RegMode::relaxed, -1, 2000, 0.9995, 0.99, 3, 0.1, &best2);

  std::string detail =
      fmt("plan 6831 steps / 163944 gates as quoted formulas give (a quoted ~11900-gate "
          "figure is not reproducible from them and is flagged, not asserted); 1q "
          "rotation best avg fidelity %.6f, 2q chain best avg fidelity %.6f with %zu "
          "gates",
          best1, best2, l2.parameter_count());

  bool long_ok = true;
  if (long_runs) {
    double best3 = 0.0;
    HeisenbergSpec spec3;
    spec3.qubits = 3;
    spec3.seed = 7;
    Layout l3 = generic_layout(3, 4);
    long_ok = l3.parameter_count() <= 52 &&
              compress_reaches(exact_evolution(heisenberg_hamiltonian(spec3), 1.0), l3,
                               10.0, RegMode::relaxed, 2, 2000, 0.9995, 0.999, 3, 0.1,
                               &best3);
    detail += fmt("; 3q chain best avg fidelity %.6f with %zu gates", best3,
                  l3.parameter_count());
  } else {
    detail += "; 3q long variant skipped";
  }
  detail += fmt(", %.1f s", t.s());

  line(8, "product formulas and circuit compression",
       counts_ok && rot_ok && heis_ok && long_ok, detail);
}

// ---------------------------------------------------------------- criterion 9

void criterion_9(bool long_runs) {
  if (!long_runs) {
    skip_line(9, "8-qubit pure-state convergence");
    return;
  }
  constexpr double kThreshold = 0.95;
  Timer t;
  Layout layout = generic_layout(8, 4);
  RandomTarget target = random_target(layout, 1, 12345);
  int reached = 0;
  std::string finals;
  for (int s = 1; s <= 3; ++s) {
    TrainingConfig cfg;
    cfg.layout = layout;
    cfg.lambda = 10.0;
    cfg.eta_angles = cfg.eta_logits = cfg.eta_disc = 0.01;
    cfg.epochs = 1800;
    cfg.reg_mode = RegMode::relaxed;
    cfg.disc_weight_cap = 2;
    cfg.stop_fidelity = kThreshold;
    cfg.seed = std::uint64_t(s);
    RunHistory h = train(cfg, target.state);
    const bool ok = h.reached_stop || h.final_fidelity >= kThreshold;
    reached += ok ? 1 : 0;
    finals += fmt("%s%.4f", s == 1 ? "" : " ", ok ? kThreshold : h.final_fidelity);
  }
  line(9, "8-qubit pure-state convergence", reached == 3,
       fmt("reached %d/3 seeds within 1800 epochs, fidelities [%s], %.1f s", reached,
           finals.c_str(), t.s()));
}

}  // namespace

int main(int argc, char** argv) {
  bool long_runs = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--long") == 0) long_runs = true;
  }
  std::printf("acceptance suite (%s)\n", long_runs ? "full, including long runs"
                                                   : "default; long runs skipped");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7(long_runs);
  criterion_8(long_runs);
  criterion_9(long_runs);
  if (g_failures == 0) {
    std::printf("all executed criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
