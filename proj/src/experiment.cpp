#include "qwgan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace qwgan {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int to_int(const std::string& s) {
  size_t pos = 0;
  int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  size_t pos = 0;
  unsigned long long v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

double to_double(const std::string& s) {
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("not a boolean: " + s);
}

std::vector<double> to_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = {
      {"qubits", [](ExperimentConfig& c, const std::string& v) { c.qubits = to_int(v); }},
      {"layout", [](ExperimentConfig& c, const std::string& v) { c.layout_name = v; }},
      {"depth", [](ExperimentConfig& c, const std::string& v) { c.depth = to_int(v); }},
      {"rank", [](ExperimentConfig& c, const std::string& v) { c.rank = to_int(v); }},
      {"target_rank",
       [](ExperimentConfig& c, const std::string& v) { c.target_rank = to_int(v); }},
      {"lambda", [](ExperimentConfig& c, const std::string& v) { c.lambda = to_double(v); }},
      {"eta", [](ExperimentConfig& c, const std::string& v) { c.eta = to_double(v); }},
      {"eta_angles",
       [](ExperimentConfig& c, const std::string& v) { c.eta_angles = to_double(v); }},
      {"eta_logits",
       [](ExperimentConfig& c, const std::string& v) { c.eta_logits = to_double(v); }},
      {"eta_disc",
       [](ExperimentConfig& c, const std::string& v) { c.eta_disc = to_double(v); }},
      {"epochs", [](ExperimentConfig& c, const std::string& v) { c.epochs = to_int(v); }},
      {"repeats", [](ExperimentConfig& c, const std::string& v) { c.repeats = to_int(v); }},
      {"disc_steps",
       [](ExperimentConfig& c, const std::string& v) { c.disc_steps = to_int(v); }},
      {"reg", [](ExperimentConfig& c, const std::string& v) { c.reg = v; }},
      {"taylor_order",
       [](ExperimentConfig& c, const std::string& v) { c.taylor_order = to_int(v); }},
      {"disc_method",
       [](ExperimentConfig& c, const std::string& v) { c.disc_method = v; }},
      {"disc_cap", [](ExperimentConfig& c, const std::string& v) { c.disc_cap = to_int(v); }},
      {"stop_fidelity",
       [](ExperimentConfig& c, const std::string& v) { c.stop_fidelity = to_double(v); }},
      {"sigma", [](ExperimentConfig& c, const std::string& v) { c.sigma = to_double(v); }},
      {"noisy_gradients",
       [](ExperimentConfig& c, const std::string& v) { c.noisy_gradients = to_bool(v); }},
      {"target_seed",
       [](ExperimentConfig& c, const std::string& v) { c.target_seed = to_u64(v); }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.base_seed = to_u64(v); }},
      {"target_kind",
       [](ExperimentConfig& c, const std::string& v) { c.target_kind = v; }},
      {"time", [](ExperimentConfig& c, const std::string& v) { c.time = to_double(v); }},
      {"error_budget",
       [](ExperimentConfig& c, const std::string& v) { c.error_budget = to_double(v); }},
      {"order", [](ExperimentConfig& c, const std::string& v) { c.order_k = to_int(v); }},
      {"coupling",
       [](ExperimentConfig& c, const std::string& v) { c.coupling = to_double(v); }},
      {"field", [](ExperimentConfig& c, const std::string& v) { c.field = to_double(v); }},
      {"ham_seed",
       [](ExperimentConfig& c, const std::string& v) { c.ham_seed = to_u64(v); }},
      {"state_a", [](ExperimentConfig& c, const std::string& v) { c.state_a = v; }},
      {"state_b", [](ExperimentConfig& c, const std::string& v) { c.state_b = v; }},
      {"lambdas",
       [](ExperimentConfig& c, const std::string& v) { c.lambdas = to_double_list(v); }},
      {"out", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds = {"train-pure",       "train-mixed",
                                                "train-noisy",      "compress-circuit",
                                                "qw-eval",          "grad-check"};
  return cmds;
}

bool is_training(const std::string& cmd) {
  return cmd == "train-pure" || cmd == "train-mixed" || cmd == "train-noisy";
}

void apply_defaults(ExperimentConfig& c) {
  const bool training = is_training(c.command);
  const bool compress = c.command == "compress-circuit";
  if (c.layout_name.empty())
    c.layout_name = c.command == "train-noisy" ? "ionq" : "generic";
  if (c.depth < 0) {
    if (compress)
      c.depth = c.qubits <= 1 ? 1 : (c.qubits == 2 ? 3 : 4);
    else
      c.depth = c.qubits <= 4 ? 3 : 4;
  }
  if (c.rank < 0) c.rank = c.command == "train-mixed" ? 2 : 1;
  if (c.target_rank < 0) c.target_rank = c.command == "train-mixed" ? c.rank : 1;
  if (c.sigma < 0) c.sigma = c.command == "train-noisy" ? 0.1 : 0.0;
  if (c.lambda <= 0)
    c.lambda = (c.qubits <= 2 && c.target_rank == 1 && !compress) ? 2.0 : 10.0;
  if (c.eta <= 0) c.eta = c.qubits >= 8 ? 0.01 : 0.1;
  if (c.eta_angles <= 0) c.eta_angles = c.eta;
  if (c.eta_logits <= 0) c.eta_logits = c.eta;
  if (c.eta_disc <= 0) c.eta_disc = c.eta;
  if (c.epochs < 0) {
    if (c.command == "train-pure")
      c.epochs = c.qubits <= 1 ? 300 : (c.qubits == 2 ? 500 : (c.qubits <= 4 ? 1500 : 1800));
    else if (c.command == "train-mixed")
      c.epochs = 400;
    else if (c.command == "train-noisy")
      c.epochs = 1500;
    else if (compress)
      c.epochs = c.qubits <= 1 ? 500 : 2000;
    else
      c.epochs = 1;
  }
  if (c.repeats < 0) c.repeats = training ? 5 : 1;
  // read noise attaches to each measured trace, and the measured-form update
  // scales the regularizer reading by 1/lambda afterwards, so it degrades
  // far more gracefully than differentiating through the exponential
  if (c.disc_method.empty())
    c.disc_method = c.command == "train-noisy" ? "commuting" : "frechet";
  const int effective = compress ? 2 * c.qubits : c.qubits;
  if (c.reg.empty()) c.reg = effective <= 2 ? "exact" : "relaxed";
  // the full string basis is 4^n; keep large registers measurable
  if (c.disc_cap < 0 && effective >= 6) c.disc_cap = 2;
}

void validate(const ExperimentConfig& c) {
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw usage_error("unknown command '" + c.command + "'");
  if (c.qubits < 1) throw usage_error("qubits must be positive");
  if (c.repeats < 1) throw usage_error("repeats must be positive");
  if (c.epochs < 1) throw usage_error("epochs must be positive");
  if (c.rank < 1 || c.target_rank < 1) throw usage_error("rank must be positive");
  if (c.lambda <= 0) throw usage_error("lambda must be positive");
  if (c.eta_angles <= 0 || c.eta_logits <= 0 || c.eta_disc <= 0)
    throw usage_error("learning rates must be positive");
  if (c.disc_steps < 0) throw usage_error("disc_steps must be non-negative");
  if (c.taylor_order < 1) throw usage_error("taylor_order must be positive");
  if (c.sigma < 0) throw usage_error("sigma must be non-negative");
  if (c.reg != "exact" && c.reg != "relaxed" && c.reg != "decomposed")
    throw usage_error("reg must be exact, relaxed or decomposed");
  if (c.disc_method != "frechet" && c.disc_method != "commuting")
    throw usage_error("disc_method must be frechet or commuting");
  if (c.layout_name != "generic" && c.layout_name != "ionq")
    throw usage_error("unknown layout '" + c.layout_name + "'");
  if (c.command == "qw-eval" && (c.state_a.empty() || c.state_b.empty()))
    throw usage_error("qw-eval requires state_a and state_b");
  if (c.command == "compress-circuit" && c.target_kind != "heisenberg" &&
      c.target_kind != "rotation")
    throw usage_error("target_kind must be heisenberg or rotation");
}

RegMode reg_mode_of(const std::string& s) {
  if (s == "exact") return RegMode::exact;
  if (s == "relaxed") return RegMode::relaxed;
  return RegMode::pauli_decomposed;
}

DiscGradMethod disc_method_of(const std::string& s) {
  return s == "commuting" ? DiscGradMethod::commuting_form
                          : DiscGradMethod::frechet_exact;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  bool have_section = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw usage_error("malformed section header (line " + std::to_string(lineno) + ")");
      if (have_section)
        throw usage_error("multiple sections (line " + std::to_string(lineno) + ")");
      cfg.command = trim(t.substr(1, t.size() - 2));
      have_section = true;
      continue;
    }
    if (!have_section)
      throw usage_error("key before any [command] section (line " + std::to_string(lineno) +
                        ")");
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw usage_error("expected key = value (line " + std::to_string(lineno) + ")");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw usage_error("expected key = value (line " + std::to_string(lineno) + ")");
    auto it = key_table().find(key);
    if (it == key_table().end())
      throw usage_error("unknown key '" + key + "' (line " + std::to_string(lineno) + ")");
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      throw usage_error(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
  }
  if (!have_section) throw usage_error("config has no [command] section");
  apply_defaults(cfg);
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw usage_error("cannot open config file " + path);
  return parse_config(is);
}

namespace {

int qubits_of_dim(Eigen::Index d) {
  int n = 0;
  while ((Eigen::Index(1) << n) < d) ++n;
  if ((Eigen::Index(1) << n) != d)
    throw usage_error("dimension is not a power of two");
  return n;
}

}  // namespace

LoadedState read_state_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw usage_error("cannot open state file " + path);
  std::string kind;
  int n = -1;
  std::string line;
  int lineno = 0;
  auto next_tokens = [&](std::vector<std::string>& toks) -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      toks.clear();
      std::stringstream ss(t);
      std::string w;
      while (ss >> w) toks.push_back(w);
      return true;
    }
    return false;
  };
  std::vector<std::string> toks;
  if (!next_tokens(toks) || toks.size() != 2)
    throw usage_error(path + ": expected header '<pure|mixed> <qubits>'");
  kind = toks[0];
  try {
    n = to_int(toks[1]);
  } catch (const std::exception&) {
    throw usage_error(path + ": bad qubit count '" + toks[1] + "'");
  }
  if ((kind != "pure" && kind != "mixed") || n < 1)
    throw usage_error(path + ": expected header '<pure|mixed> <qubits>'");
  const Eigen::Index d = Eigen::Index(1) << n;
  const Eigen::Index entries = kind == "pure" ? d : d * d;
  std::vector<cplx> vals;
  vals.reserve(size_t(entries));
  while (Eigen::Index(vals.size()) < entries) {
    if (!next_tokens(toks))
      throw usage_error(path + ": expected " + std::to_string(entries) + " entries, got " +
                        std::to_string(vals.size()));
    if (toks.size() != 2)
      throw usage_error(path + ": expected 're im' (line " + std::to_string(lineno) + ")");
    try {
      vals.emplace_back(to_double(toks[0]), to_double(toks[1]));
    } catch (const std::exception&) {
      throw usage_error(path + ": bad entry (line " + std::to_string(lineno) + ")");
    }
  }
  try {
    if (kind == "pure") {
      Vector v(d);
      for (Eigen::Index i = 0; i < d; ++i) v[i] = vals[size_t(i)];
      PureState ps(v);
      return LoadedState{ps.density(), ps};
    }
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = vals[size_t(i * d + j)];
    return LoadedState{DensityMatrix::from_matrix(m), std::nullopt};
  } catch (const std::exception& e) {
    throw usage_error(path + ": " + e.what());
  }
}

void write_state_file(const std::string& path, const DensityMatrix& rho) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  const Eigen::Index d = rho.dim();
  os << "mixed " << qubits_of_dim(d) << "\n";
  char buf[80];
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", rho.matrix()(i, j).real(),
                    rho.matrix()(i, j).imag());
      os << buf;
    }
}

void write_state_file(const std::string& path, const PureState& psi) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  const Eigen::Index d = psi.dim();
  os << "pure " << qubits_of_dim(d) << "\n";
  char buf[80];
  for (Eigen::Index i = 0; i < d; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", psi.amplitudes()[i].real(),
                  psi.amplitudes()[i].imag());
    os << buf;
  }
}

namespace {

namespace fs = std::filesystem;

void run_indexed(int count, int workers, const std::function<void(int)>& fn) {
  std::vector<std::string> errors(static_cast<size_t>(count));
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[size_t(i)] = e.what();
      }
    }
  } else {
    std::atomic<int> next{0};
    auto body = [&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          errors[size_t(i)] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min(workers, count);
    pool.reserve(size_t(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
}

void write_summary(const std::vector<RunHistory>& runs, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "epoch,fidelity_mean,fidelity_min,fidelity_max\n";
  size_t max_len = 0;
  for (const auto& r : runs) max_len = std::max(max_len, r.records.size());
  char buf[160];
  for (size_t e = 0; e < max_len; ++e) {
    double sum = 0.0, lo = 1.0, hi = 0.0;
    for (const auto& r : runs) {
      // a converged early-stopped run holds its last fidelity
      const double f = e < r.records.size() ? r.records[e].fidelity
                                            : r.records.back().fidelity;
      sum += f;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", e, sum / double(runs.size()),
                  lo, hi);
    os << buf;
  }
}

TrainingConfig training_config_of(const ExperimentConfig& cfg, const Layout& layout) {
  TrainingConfig tc;
  tc.layout = layout;
  tc.rank = cfg.rank;
  tc.lambda = cfg.lambda;
  tc.eta_angles = cfg.eta_angles;
  tc.eta_logits = cfg.eta_logits;
  tc.eta_disc = cfg.eta_disc;
  tc.epochs = cfg.epochs;
  tc.disc_steps = cfg.disc_steps;
  tc.sigma = cfg.sigma;
  tc.noisy_gradients = cfg.noisy_gradients;
  tc.reg_mode = reg_mode_of(cfg.reg);
  tc.taylor_order = cfg.taylor_order;
  tc.disc_method = disc_method_of(cfg.disc_method);
  tc.disc_weight_cap = cfg.disc_cap;
  tc.stop_fidelity = cfg.stop_fidelity;
  return tc;
}

int run_training_command(const ExperimentConfig& cfg, const RunOptions& opt) {
  Layout layout = layout_by_name(cfg.layout_name, cfg.qubits, cfg.depth);
  RandomTarget rt = random_target(layout, cfg.target_rank, cfg.target_seed);
  TrainingConfig base = training_config_of(cfg, layout);
  std::vector<RunHistory> runs(size_t(cfg.repeats));
  run_indexed(cfg.repeats, opt.workers, [&](int i) {
    TrainingConfig tc = base;
    tc.seed = cfg.base_seed + std::uint64_t(i);
    RunHistory h = train(tc, rt.state);
    const std::string stem = cfg.out_dir + "/seed_" + std::to_string(tc.seed);
    write_history_csv(h, stem + ".csv");
    write_parameters(h, stem + "_params.txt");
    runs[size_t(i)] = std::move(h);
  });
  write_summary(runs, cfg.out_dir + "/summary.csv");
  char buf[200];
  for (int i = 0; i < cfg.repeats; ++i) {
    const auto& h = runs[size_t(i)];
    double best = 0.0;
    for (const auto& r : h.records) best = std::max(best, r.fidelity);
    best = std::max(best, h.final_fidelity);
    std::snprintf(buf, sizeof(buf),
                  "seed %llu: epochs %d, final fidelity %.6f, best %.6f\n",
                  static_cast<unsigned long long>(cfg.base_seed + std::uint64_t(i)),
                  h.epochs_run, h.final_fidelity, best);
    std::cout << buf;
  }
  std::cout << "wrote " << cfg.repeats << " histories and summary.csv to " << cfg.out_dir
            << "\n";
  return 0;
}

Matrix compress_target(const ExperimentConfig& cfg) {
  if (cfg.target_kind == "rotation") {
    if (cfg.qubits != 1) throw usage_error("rotation target is single-qubit");
    return RotationGate({0}, PauliString("X"), cfg.time).unitary(1);
  }
  HeisenbergSpec hs{cfg.qubits, cfg.coupling, cfg.field, cfg.ham_seed};
  PauliObservable h = heisenberg_hamiltonian(hs);
  TrotterPlan plan = trotter_plan(int(h.size()), cfg.time, cfg.error_budget, cfg.order_k);
  return suzuki_circuit(h, cfg.time, plan.steps, cfg.order_k).unitary();
}

int run_compress_command(const ExperimentConfig& cfg, const RunOptions& opt) {
  Layout layout = layout_by_name(cfg.layout_name, cfg.qubits, cfg.depth);
  Matrix target = compress_target(cfg);
  CompressionConfig cc;
  cc.layout = layout;
  cc.lambda = cfg.lambda;
  cc.eta_angles = cfg.eta_angles;
  cc.eta_logits = cfg.eta_logits;
  cc.eta_disc = cfg.eta_disc;
  cc.epochs = cfg.epochs;
  cc.disc_steps = cfg.disc_steps;
  cc.reg_mode = reg_mode_of(cfg.reg);
  cc.taylor_order = cfg.taylor_order;
  cc.disc_method = disc_method_of(cfg.disc_method);
  cc.disc_weight_cap = cfg.disc_cap;
  cc.stop_fidelity = cfg.stop_fidelity;
  cc.sigma = cfg.sigma;
  cc.noisy_gradients = cfg.noisy_gradients;

  std::vector<CompressionResult> results;
  results.reserve(size_t(cfg.repeats));
  for (int i = 0; i < cfg.repeats; ++i) results.push_back(CompressionResult{Circuit(1), {}, 0, 0});
  std::vector<RunHistory> runs(size_t(cfg.repeats));
  run_indexed(cfg.repeats, opt.workers, [&](int i) {
    CompressionConfig c = cc;
    c.seed = cfg.base_seed + std::uint64_t(i);
    CompressionResult res = compress_circuit(target, c);
    write_history_csv(res.history,
                      cfg.out_dir + "/seed_" + std::to_string(c.seed) + ".csv");
    runs[size_t(i)] = res.history;
    results[size_t(i)] = std::move(res);
  });
  write_summary(runs, cfg.out_dir + "/summary.csv");
  size_t best = 0;
  for (size_t i = 1; i < results.size(); ++i)
    if (results[i].avg_fidelity > results[best].avg_fidelity) best = i;
  const CompressionResult& win = results[best];
  {
    std::ofstream os(cfg.out_dir + "/circuit_layout.txt");
    if (!os) throw std::runtime_error("cannot write circuit layout");
    write_layout(os, layout);
  }
  {
    std::ofstream os(cfg.out_dir + "/circuit_angles.txt");
    if (!os) throw std::runtime_error("cannot write circuit angles");
    write_angles(os, {win.circuit.angles()});
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "gates %zu, avg output fidelity %.6f, channel-state fidelity %.6f\n",
                win.circuit.size(), win.avg_fidelity, win.choi_fidelity);
  std::cout << buf;
  return 0;
}

int run_qw_eval(const ExperimentConfig& cfg) {
  LoadedState a = read_state_file(cfg.state_a);
  LoadedState b = read_state_file(cfg.state_b);
  if (a.state.dim() != b.state.dim())
    throw usage_error("state files have different dimensions");
  std::vector<std::string> lines;
  char buf[200];
  CouplingProblem prob{a.state, b.state};
  CouplingResult pr = qw_primal(prob);
  std::snprintf(buf, sizeof(buf), "primal %.10g  (iterations %ld, marginal residual %.3g)",
                pr.value, pr.iterations, pr.marginal_residual);
  lines.emplace_back(buf);
  std::vector<size_t> order(cfg.lambdas.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return cfg.lambdas[x] > cfg.lambdas[y]; });
  std::vector<std::string> dual_lines(order.size());
  DualAscentOptions opt;
  for (size_t i : order) {
    const double l = cfg.lambdas[i];
    DualAscentResult res = maximize_dual(a.state, b.state, l, opt);
    DualVariables feas = feasibility_shift(res.dv);
    const double dval = dual_objective(a.state, b.state, feas);
    std::snprintf(buf, sizeof(buf), "lambda %g: regularized dual %.10g, feasible dual %.10g",
                  l, res.value, dval);
    dual_lines[i] = buf;
    opt.initial = std::move(res.dv);
  }
  for (auto& s : dual_lines) lines.push_back(std::move(s));
  if (a.pure && b.pure) {
    std::snprintf(buf, sizeof(buf), "closed form %.10g", qw_pure(*a.pure, *b.pure));
    lines.emplace_back(buf);
  }
  std::ofstream os(cfg.out_dir + "/qw_eval.txt");
  if (!os) throw std::runtime_error("cannot write qw_eval.txt");
  for (const auto& s : lines) {
    std::cout << s << "\n";
    os << s << "\n";
  }
  return 0;
}

GeneratorEnsemble seeded_generator(const Layout& layout, int rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uang(0.0, 4.0 * std::acos(0.0));
  std::uniform_real_distribution<double> ulog(-1.0, 1.0);
  std::vector<Circuit> circuits;
  for (int i = 0; i < rank; ++i) {
    RealVector a(layout.parameter_count());
    for (long j = 0; j < a.size(); ++j) a[j] = uang(rng);
    circuits.push_back(layout.instantiate(a));
  }
  RealVector logits(rank);
  for (int i = 0; i < rank; ++i) logits[i] = ulog(rng);
  return GeneratorEnsemble(std::move(circuits), logits);
}

DualVariables seeded_dual(int qubits, double lambda, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  PauliObservable phi(qubits), psi(qubits);
  for (const auto& s : pauli_basis(qubits)) {
    phi.add_term(u(rng), s);
    psi.add_term(u(rng), s);
  }
  return DualVariables(phi, psi, lambda);
}

int run_grad_check(const ExperimentConfig& cfg) {
  const double fd_step = 1e-5;
  std::vector<std::string> lines;
  bool all_ok = true;
  char buf[240];

  auto report = [&](const std::string& name, double worst_excess, double max_diff) {
    const bool ok = worst_excess <= 0.0;
    all_ok = all_ok && ok;
    std::snprintf(buf, sizeof(buf), "%s %s  (max |analytic-fd| %.3g, worst tolerance excess %.3g)",
                  ok ? "ok  " : "FAIL", name.c_str(), max_diff, worst_excess);
    lines.emplace_back(buf);
  };
  auto excess = [](double a, double f) {
    return std::abs(a - f) - std::max(1e-6, 1e-4 * std::abs(f));
  };

  const RegMode modes[2] = {RegMode::exact, RegMode::relaxed};
  const char* mode_names[2] = {"exact", "relaxed"};
  for (int n = 1; n <= 2; ++n) {
    for (int mi = 0; mi < 2; ++mi) {
      const RegMode mode = modes[mi];
      const std::uint64_t seed = 100 * std::uint64_t(n) + std::uint64_t(mi);
      Layout layout = generic_layout(n, 2);
      GeneratorEnsemble gen = seeded_generator(layout, 2, seed);
      std::mt19937_64 rng(seed + 17);
      DensityMatrix target = random_density(Eigen::Index(1) << n, 2, rng);
      DualVariables dv = seeded_dual(n, 2.0, 0.2, seed + 33);
      const std::string tag =
          std::to_string(n) + "q/" + mode_names[mi] + " ";

      {
        RealVector g = grad_logits(gen, target, dv, mode);
        double worst = -1e30, diff = 0.0;
        for (int i = 0; i < gen.rank(); ++i) {
          GeneratorEnsemble up = gen, dn = gen;
          RealVector lu = gen.logits(), ld = gen.logits();
          lu[i] += fd_step;
          ld[i] -= fd_step;
          up.set_logits(lu);
          dn.set_logits(ld);
          const double fd = (training_loss(up, target, dv, mode) -
                             training_loss(dn, target, dv, mode)) /
                            (2 * fd_step);
          worst = std::max(worst, excess(g[i], fd));
          diff = std::max(diff, std::abs(g[i] - fd));
        }
        report(tag + "logits", worst, diff);
      }
      {
        std::vector<RealVector> g = grad_angles_exact(gen, target, dv, mode);
        std::vector<RealVector> gs = grad_angles_shift(gen, target, dv, mode);
        double worst = -1e30, diff = 0.0, shift_diff = 0.0;
        for (int i = 0; i < gen.rank(); ++i)
          for (size_t j = 0; j < gen.circuit(i).size(); ++j) {
            GeneratorEnsemble up = gen, dn = gen;
            up.circuit(i).set_angle(j, gen.circuit(i).angle(j) + fd_step);
            dn.circuit(i).set_angle(j, gen.circuit(i).angle(j) - fd_step);
            const double fd = (training_loss(up, target, dv, mode) -
                               training_loss(dn, target, dv, mode)) /
                              (2 * fd_step);
            worst = std::max(worst, excess(g[size_t(i)][long(j)], fd));
            diff = std::max(diff, std::abs(g[size_t(i)][long(j)] - fd));
            shift_diff = std::max(shift_diff,
                                  std::abs(g[size_t(i)][long(j)] - gs[size_t(i)][long(j)]));
          }
        report(tag + "angles", worst, diff);
        report(tag + "shift-vs-exact", shift_diff - 1e-9, shift_diff);
      }
      {
        DiscriminatorGradient g = grad_discriminator(gen.state(), target, dv,
                                                     DiscGradMethod::frechet_exact, mode);
        double worst = -1e30, diff = 0.0;
        for (size_t k = 0; k < dv.phi.size(); ++k) {
          DualVariables up = dv, dn = dv;
          up.phi.set_coeff(k, dv.phi.coeff(k) + fd_step);
          dn.phi.set_coeff(k, dv.phi.coeff(k) - fd_step);
          const double fd = (training_loss(gen, target, up, mode) -
                             training_loss(gen, target, dn, mode)) /
                            (2 * fd_step);
          worst = std::max(worst, excess(g.alpha[long(k)], fd));
          diff = std::max(diff, std::abs(g.alpha[long(k)] - fd));
        }
        for (size_t l = 0; l < dv.psi.size(); ++l) {
          DualVariables up = dv, dn = dv;
          up.psi.set_coeff(l, dv.psi.coeff(l) + fd_step);
          dn.psi.set_coeff(l, dv.psi.coeff(l) - fd_step);
          const double fd = (training_loss(gen, target, up, mode) -
                             training_loss(gen, target, dn, mode)) /
                            (2 * fd_step);
          worst = std::max(worst, excess(g.beta[long(l)], fd));
          diff = std::max(diff, std::abs(g.beta[long(l)] - fd));
        }
        report(tag + "discriminator", worst, diff);
      }
    }
  }

  std::ofstream os(cfg.out_dir + "/grad_check.txt");
  if (!os) throw std::runtime_error("cannot write grad_check.txt");
  for (const auto& s : lines) {
    std::cout << s << "\n";
    os << s << "\n";
  }
  return all_ok ? 0 : 3;
}

bool needs_long(const ExperimentConfig& cfg) {
  if (is_training(cfg.command) && cfg.qubits >= 8) return true;
  if (cfg.command == "compress-circuit" && cfg.qubits >= 3) return true;
  return false;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentConfig cfg = config;
  if (options.seed_override) cfg.base_seed = *options.seed_override;
  if (options.out_override) cfg.out_dir = *options.out_override;
  if (needs_long(cfg) && !options.long_runs)
    throw usage_error("this configuration is a long run; pass --long to confirm");
  fs::create_directories(cfg.out_dir);
  if (is_training(cfg.command)) return run_training_command(cfg, options);
  if (cfg.command == "compress-circuit") return run_compress_command(cfg, options);
  if (cfg.command == "qw-eval") return run_qw_eval(cfg);
  if (cfg.command == "grad-check") return run_grad_check(cfg);
  throw usage_error("unknown command '" + cfg.command + "'");
}

}  // namespace qwgan
