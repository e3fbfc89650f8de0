#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qwgan/pauli.hpp"
#include "qwgan/qcore.hpp"

namespace qwgan {

// Ordered list of rotation gates on a register; gates_[0] is applied first,
// so the unitary is the right-to-left product of the gate matrices.
class Circuit {
 public:
  explicit Circuit(int qubits) : qubits_(qubits) {
    if (qubits < 1) throw shape_error("qubit count must be positive");
  }
  Circuit(int qubits, std::vector<RotationGate> gates);

  int qubits() const { return qubits_; }
  Eigen::Index dim() const { return Eigen::Index(1) << qubits_; }
  const std::vector<RotationGate>& gates() const { return gates_; }
  size_t size() const { return gates_.size(); }
  void append(RotationGate g);

  double angle(size_t k) const { return gates_[k].angle(); }
  void set_angle(size_t k, double a) { gates_[k].set_angle(a); }
  RealVector angles() const;
  void set_angles(const RealVector& a);

  Matrix unitary() const;
  Vector apply(const Vector& in) const;

 private:
  int qubits_;
  std::vector<RotationGate> gates_;
};

// Mixture sum_i softmax(logits)_i U_i rho0 U_i^dagger with a shared pure
// initial state (all-zeros register by default).
class GeneratorEnsemble {
 public:
  GeneratorEnsemble(std::vector<Circuit> circuits, RealVector logits);
  GeneratorEnsemble(std::vector<Circuit> circuits, RealVector logits, PureState initial);

  int qubits() const { return circuits_[0].qubits(); }
  Eigen::Index dim() const { return circuits_[0].dim(); }
  int rank() const { return int(circuits_.size()); }
  const std::vector<Circuit>& circuits() const { return circuits_; }
  Circuit& circuit(int i) { return circuits_[size_t(i)]; }
  const Circuit& circuit(int i) const { return circuits_[size_t(i)]; }
  const RealVector& logits() const { return logits_; }
  void set_logits(const RealVector& l);
  const PureState& initial_state() const { return initial_; }

  RealVector probabilities() const;          // softmax(logits)
  Vector member_state(int i) const;          // U_i |initial>
  std::vector<Vector> member_states() const;
  DensityMatrix state() const;

 private:
  void validate() const;
  std::vector<Circuit> circuits_;
  RealVector logits_;
  PureState initial_;
};

RealVector softmax(const RealVector& logits);
PureState all_zeros_state(int qubits);
PureState max_entangled_state(int half_qubits);  // on 2*half_qubits qubits

// Named, reproducible gate arrangement; angles live outside the layout.
struct Layout {
  std::string name;
  int qubits = 0;
  std::vector<GateTemplate> gates;

  size_t parameter_count() const { return gates.size(); }
  Circuit instantiate(const RealVector& angles) const;
  // Places each gate on target + offset within a wider register.
  Layout embedded(int total_qubits, int offset) const;
};

// Alternating layers: X,Y,Z rotation on every qubit, then a ZZ coupler on
// every nearest-neighbor pair.
Layout generic_layout(int qubits, int depth);
// Fixed 4-qubit trapped-ion arrangement: Z,X,Z column on every wire followed
// by XX couplers on all six pairs (18 parameters).
Layout ionq_layout(int qubits);
Layout layout_by_name(const std::string& name, int qubits, int depth);

struct RandomTarget {
  DensityMatrix state;
  std::vector<RealVector> angles;  // hidden generating parameters
  RealVector logits;
};

// Target drawn from the layout with angles uniform on [0, 2pi); rank > 1
// mixes that many independently drawn circuits with uniform weights.
RandomTarget random_target(const Layout& layout, int rank, std::uint64_t seed);

void write_layout(std::ostream& os, const Layout& layout);
Layout read_layout(std::istream& is);
// Flat angle store keyed by (circuit index, gate index).
void write_angles(std::ostream& os, const std::vector<RealVector>& angles);
std::vector<RealVector> read_angles(std::istream& is);

}  // namespace qwgan
