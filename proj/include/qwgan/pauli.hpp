#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qwgan/qcore.hpp"

namespace qwgan {

enum class PauliLetter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char letter_char(PauliLetter l);
PauliLetter letter_from_char(char c);

// Tensor product of single-qubit Pauli operators, qubit 0 leftmost.  Each
// string is a signed permutation in the computational basis, so application
// and traces run in O(2^n) without forming the dense matrix.
class PauliString {
 public:
  explicit PauliString(std::string_view letters);
  explicit PauliString(std::vector<PauliLetter> letters);
  static PauliString identity(int qubits);

  int qubits() const { return int(letters_.size()); }
  PauliLetter letter(int q) const { return letters_[size_t(q)]; }
  const std::vector<PauliLetter>& letters() const { return letters_; }
  bool is_identity() const;
  int weight() const;  // number of non-identity letters

  std::string str() const;
  Matrix matrix() const;

  // out[i ^ xmask] = phase(i) * in[i]
  void apply(const Vector& in, Vector& out) const;
  cplx trace_with(const Matrix& m) const;      // Tr[m * S]
  double expectation(const Vector& v) const;   // <v|S|v>
  double expectation(const Matrix& rho) const;

  // Embeds into a register of n qubits, placing letter k on targets[k].
  PauliString embed(int qubits, const std::vector<int>& targets) const;

  bool operator==(const PauliString& o) const { return letters_ == o.letters_; }

 private:
  std::vector<PauliLetter> letters_;
};

// (phase, string) with phase in {1, i, -1, -i}
std::pair<cplx, PauliString> pauli_product(const PauliString& a, const PauliString& b);

struct PauliTerm {
  double coeff;
  PauliString string;
};

// Real linear combination of Pauli strings on a fixed register.
class PauliObservable {
 public:
  explicit PauliObservable(int qubits) : qubits_(qubits) {}
  PauliObservable(int qubits, std::vector<PauliTerm> terms);

  // Accepts "0.5*ZZI + -0.25*XIX" (whitespace-insensitive).
  static PauliObservable parse(std::string_view text);
  std::string str() const;

  int qubits() const { return qubits_; }
  Eigen::Index dim() const { return Eigen::Index(1) << qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  size_t size() const { return terms_.size(); }
  double coeff(size_t k) const { return terms_[k].coeff; }
  void set_coeff(size_t k, double v) { terms_[k].coeff = v; }

  void add_term(double coeff, PauliString s);
  Matrix matrix() const;
  double expectation(const DensityMatrix& rho) const;
  double expectation(const Vector& pure) const;
  bool is_zero() const;

 private:
  int qubits_;
  std::vector<PauliTerm> terms_;
};

// Full string basis on n qubits in lexicographic letter order (4^n strings);
// used to span discriminator operators.
std::vector<PauliString> pauli_basis(int qubits);
// Strings of weight <= max_weight, same ordering, identity included.
std::vector<PauliString> pauli_basis_bounded(int qubits, int max_weight);

// exp(i*angle*axis/2) acting on the listed targets (1 or 2, distinct), axis
// non-identity on every target.
class RotationGate {
 public:
  RotationGate(std::vector<int> targets, PauliString axis, double angle);

  const std::vector<int>& targets() const { return targets_; }
  const PauliString& axis() const { return axis_; }
  double angle() const { return angle_; }
  void set_angle(double a) { angle_ = a; }

  PauliString embedded_axis(int qubits) const;
  Matrix unitary(int qubits) const;
  Matrix derivative(int qubits) const;  // d(unitary)/d(angle)
  void apply(const Vector& in, Vector& out, int qubits) const;

 private:
  std::vector<int> targets_;
  PauliString axis_;
  double angle_;
};

struct GateTemplate {
  std::vector<int> targets;
  PauliString axis;  // may contain identity letters in vocabulary listings
};

// All one-qubit templates (4 per qubit) followed by all two-qubit templates
// (16 per unordered pair), in index order.
std::vector<GateTemplate> gate_vocabulary(int qubits);

}  // namespace qwgan
