#include "qwgan/circuit.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace qwgan {

Circuit::Circuit(int qubits, std::vector<RotationGate> gates)
    : qubits_(qubits), gates_(std::move(gates)) {
  if (qubits < 1) throw shape_error("qubit count must be positive");
  for (const RotationGate& g : gates_)
    for (int t : g.targets())
      if (t < 0 || t >= qubits_) throw shape_error("gate target out of range");
}

void Circuit::append(RotationGate g) {
  for (int t : g.targets())
    if (t < 0 || t >= qubits_) throw shape_error("gate target out of range");
  gates_.push_back(std::move(g));
}

RealVector Circuit::angles() const {
  RealVector a(Eigen::Index(gates_.size()));
  for (size_t k = 0; k < gates_.size(); ++k) a(Eigen::Index(k)) = gates_[k].angle();
  return a;
}

void Circuit::set_angles(const RealVector& a) {
  if (size_t(a.size()) != gates_.size())
    throw shape_error("angle count does not match gate count");
  for (size_t k = 0; k < gates_.size(); ++k) gates_[k].set_angle(a(Eigen::Index(k)));
}

Matrix Circuit::unitary() const {
  Matrix u = Matrix::Identity(dim(), dim());
  for (const RotationGate& g : gates_) u = g.unitary(qubits_) * u;
  return u;
}

Vector Circuit::apply(const Vector& in) const {
  if (in.size() != dim()) throw shape_error("state dimension mismatch");
  Vector cur = in, next(in.size());
  for (const RotationGate& g : gates_) {
    g.apply(cur, next, qubits_);
    cur.swap(next);
  }
  return cur;
}

GeneratorEnsemble::GeneratorEnsemble(std::vector<Circuit> circuits, RealVector logits)
    : circuits_(std::move(circuits)),
      logits_(std::move(logits)),
      initial_(all_zeros_state(circuits_.empty() ? 1 : circuits_[0].qubits())) {
  validate();
}

GeneratorEnsemble::GeneratorEnsemble(std::vector<Circuit> circuits, RealVector logits,
                                     PureState initial)
    : circuits_(std::move(circuits)), logits_(std::move(logits)), initial_(std::move(initial)) {
  validate();
}

void GeneratorEnsemble::validate() const {
  if (circuits_.empty()) throw shape_error("ensemble needs at least one circuit");
  if (logits_.size() != Eigen::Index(circuits_.size()))
    throw shape_error("logit count must equal circuit count");
  for (const Circuit& c : circuits_)
    if (c.qubits() != circuits_[0].qubits())
      throw shape_error("ensemble circuits must share the register size");
  if (initial_.dim() != circuits_[0].dim())
    throw shape_error("initial state dimension mismatch");
}

void GeneratorEnsemble::set_logits(const RealVector& l) {
  if (l.size() != logits_.size()) throw shape_error("logit count mismatch");
  logits_ = l;
}

RealVector softmax(const RealVector& logits) {
  RealVector shifted = logits.array() - logits.maxCoeff();
  RealVector e = shifted.array().exp();
  return e / e.sum();
}

RealVector GeneratorEnsemble::probabilities() const { return softmax(logits_); }

Vector GeneratorEnsemble::member_state(int i) const {
  return circuits_[size_t(i)].apply(initial_.amplitudes());
}

std::vector<Vector> GeneratorEnsemble::member_states() const {
  std::vector<Vector> out;
  out.reserve(circuits_.size());
  for (int i = 0; i < rank(); ++i) out.push_back(member_state(i));
  return out;
}

DensityMatrix GeneratorEnsemble::state() const {
  RealVector p = probabilities();
  Matrix m = Matrix::Zero(dim(), dim());
  for (int i = 0; i < rank(); ++i) {
    Vector v = member_state(i);
    m += p(i) * (v * v.adjoint());
  }
  return DensityMatrix::from_matrix(m);
}

PureState all_zeros_state(int qubits) {
  if (qubits < 1) throw shape_error("qubit count must be positive");
  Vector v = Vector::Zero(Eigen::Index(1) << qubits);
  v(0) = 1.0;
  return PureState(std::move(v));
}

PureState max_entangled_state(int half_qubits) {
  if (half_qubits < 1) throw shape_error("qubit count must be positive");
  Eigen::Index d = Eigen::Index(1) << half_qubits;
  Vector v = Vector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(double(d));
  return PureState(std::move(v));
}

Circuit Layout::instantiate(const RealVector& angles) const {
  if (size_t(angles.size()) != gates.size())
    throw shape_error("angle count does not match layout");
  Circuit c(qubits);
  for (size_t k = 0; k < gates.size(); ++k)
    c.append(RotationGate(gates[k].targets, gates[k].axis, angles(Eigen::Index(k))));
  return c;
}

Layout Layout::embedded(int total_qubits, int offset) const {
  if (offset < 0 || offset + qubits > total_qubits)
    throw shape_error("layout does not fit in the wider register");
  Layout out;
  out.name = name;
  out.qubits = total_qubits;
  for (const GateTemplate& g : gates) {
    GateTemplate shifted = g;
    for (int& t : shifted.targets) t += offset;
    out.gates.push_back(std::move(shifted));
  }
  return out;
}

Layout generic_layout(int qubits, int depth) {
  if (qubits < 1) throw shape_error("qubit count must be positive");
  if (depth < 1) throw shape_error("layout depth must be positive");
  Layout l;
  l.name = "generic" + std::to_string(depth);
  l.qubits = qubits;
  for (int layer = 0; layer < depth; ++layer) {
    for (int q = 0; q < qubits; ++q)
      for (char a : {'X', 'Y', 'Z'})
        l.gates.push_back({{q}, PauliString(std::string_view(&a, 1))});
    for (int q = 0; q + 1 < qubits; ++q)
      l.gates.push_back({{q, q + 1}, PauliString("ZZ")});
  }
  return l;
}

Layout ionq_layout(int qubits) {
  if (qubits != 4) throw shape_error("trapped-ion layout is defined for 4 qubits");
  Layout l;
  l.name = "ionq";
  l.qubits = 4;
  for (char a : {'Z', 'X', 'Z'})
    for (int q = 0; q < 4; ++q)
      l.gates.push_back({{q}, PauliString(std::string_view(&a, 1))});
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      l.gates.push_back({{a, b}, PauliString("XX")});
  return l;
}

Layout layout_by_name(const std::string& name, int qubits, int depth) {
  if (name == "generic") return generic_layout(qubits, depth);
  if (name == "ionq") return ionq_layout(qubits);
  throw std::invalid_argument("unknown layout '" + name + "'");
}

RandomTarget random_target(const Layout& layout, int rank, std::uint64_t seed) {
  if (rank < 1) throw shape_error("target rank must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<RealVector> drawn;
  std::vector<Circuit> circuits;
  for (int i = 0; i < rank; ++i) {
    RealVector a(Eigen::Index(layout.parameter_count()));
    for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = angle(rng);
    drawn.push_back(a);
    circuits.push_back(layout.instantiate(a));
  }
  RealVector logits = RealVector::Zero(rank);
  GeneratorEnsemble g(std::move(circuits), logits);
  return RandomTarget{g.state(), std::move(drawn), std::move(logits)};
}

void write_layout(std::ostream& os, const Layout& layout) {
  os << "layout " << layout.name << "\n";
  os << "qubits " << layout.qubits << "\n";
  for (const GateTemplate& g : layout.gates) {
    os << "gate";
    for (int t : g.targets) os << ' ' << t;
    os << ' ' << g.axis.str() << "\n";
  }
}

Layout read_layout(std::istream& is) {
  Layout l;
  std::string line;
  int lineno = 0;
  bool have_name = false, have_qubits = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "layout") {
      ls >> l.name;
      have_name = true;
    } else if (key == "qubits") {
      if (!(ls >> l.qubits)) throw std::invalid_argument("bad qubit count in layout file");
      have_qubits = true;
    } else if (key == "gate") {
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() < 2)
        throw std::invalid_argument("layout line " + std::to_string(lineno) +
                                    ": gate needs targets and an axis");
      std::vector<int> targets;
      for (size_t k = 0; k + 1 < tokens.size(); ++k) targets.push_back(std::stoi(tokens[k]));
      l.gates.push_back(GateTemplate{std::move(targets), PauliString(tokens.back())});
    } else {
      throw std::invalid_argument("layout line " + std::to_string(lineno) +
                                  ": unknown directive '" + key + "'");
    }
  }
  if (!have_name || !have_qubits)
    throw std::invalid_argument("layout file is missing its header");
  return l;
}

void write_angles(std::ostream& os, const std::vector<RealVector>& angles) {
  char buf[64];
  for (size_t c = 0; c < angles.size(); ++c)
    for (Eigen::Index k = 0; k < angles[c].size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu %lld %.17g\n", c, (long long)k, angles[c](k));
      os << buf;
    }
}

std::vector<RealVector> read_angles(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    size_t c;
    long long k;
    double v;
    if (!(ls >> c >> k >> v))
      throw std::invalid_argument("angle line " + std::to_string(lineno) + " is malformed");
    if (rows.size() <= c) rows.resize(c + 1);
    if (rows[c].size() != size_t(k))
      throw std::invalid_argument("angle line " + std::to_string(lineno) + " is out of order");
    rows[c].push_back(v);
  }
  std::vector<RealVector> out;
  for (const auto& r : rows) {
    RealVector v(Eigen::Index(r.size()));
    for (size_t k = 0; k < r.size(); ++k) v(Eigen::Index(k)) = r[k];
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace qwgan
