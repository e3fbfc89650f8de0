#include "qwgan/pauli.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdlib>

namespace qwgan {

namespace {

constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

// sigma_a * sigma_b = i^phase_exp * sigma_c
constexpr std::uint8_t kProdLetter[4][4] = {
    {0, 1, 2, 3},
    {1, 0, 3, 2},
    {2, 3, 0, 1},
    {3, 2, 1, 0},
};
constexpr std::uint8_t kProdPhase[4][4] = {
    {0, 0, 0, 0},
    {0, 0, 1, 3},
    {0, 3, 0, 1},
    {0, 1, 3, 0},
};

struct Masks {
  std::uint64_t x = 0;   // letters X or Y flip this bit
  std::uint64_t yz = 0;  // letters Y or Z contribute a sign
  int ny = 0;
};

Masks string_masks(const std::vector<PauliLetter>& letters) {
  Masks m;
  int n = int(letters.size());
  for (int q = 0; q < n; ++q) {
    std::uint64_t bit = std::uint64_t(1) << (n - 1 - q);
    switch (letters[size_t(q)]) {
      case PauliLetter::I: break;
      case PauliLetter::X: m.x |= bit; break;
      case PauliLetter::Y: m.x |= bit; m.yz |= bit; ++m.ny; break;
      case PauliLetter::Z: m.yz |= bit; break;
    }
  }
  return m;
}

inline double sign_of(std::uint64_t i, std::uint64_t yz) {
  return (std::popcount(i & yz) & 1) ? -1.0 : 1.0;
}

}  // namespace

char letter_char(PauliLetter l) { return "IXYZ"[int(l)]; }

PauliLetter letter_from_char(char c) {
  switch (c) {
    case 'I': return PauliLetter::I;
    case 'X': return PauliLetter::X;
    case 'Y': return PauliLetter::Y;
    case 'Z': return PauliLetter::Z;
    default: throw std::invalid_argument(std::string("invalid pauli letter '") + c + "'");
  }
}

PauliString::PauliString(std::string_view letters) {
  if (letters.empty()) throw shape_error("pauli string needs at least one letter");
  letters_.reserve(letters.size());
  for (char c : letters) letters_.push_back(letter_from_char(c));
}

PauliString::PauliString(std::vector<PauliLetter> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw shape_error("pauli string needs at least one letter");
}

PauliString PauliString::identity(int qubits) {
  if (qubits < 1) throw shape_error("qubit count must be positive");
  return PauliString(std::vector<PauliLetter>(size_t(qubits), PauliLetter::I));
}

bool PauliString::is_identity() const {
  for (PauliLetter l : letters_)
    if (l != PauliLetter::I) return false;
  return true;
}

int PauliString::weight() const {
  int w = 0;
  for (PauliLetter l : letters_)
    if (l != PauliLetter::I) ++w;
  return w;
}

std::string PauliString::str() const {
  std::string s;
  s.reserve(letters_.size());
  for (PauliLetter l : letters_) s.push_back(letter_char(l));
  return s;
}

Matrix PauliString::matrix() const {
  Eigen::Index d = Eigen::Index(1) << qubits();
  Masks m = string_masks(letters_);
  cplx base = kIPow[m.ny & 3];
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    out(Eigen::Index(std::uint64_t(i) ^ m.x), i) = base * sign_of(std::uint64_t(i), m.yz);
  return out;
}

void PauliString::apply(const Vector& in, Vector& out) const {
  Eigen::Index d = Eigen::Index(1) << qubits();
  if (in.size() != d) throw shape_error("state dimension mismatch in pauli apply");
  Masks m = string_masks(letters_);
  cplx base = kIPow[m.ny & 3];
  out.resize(d);
  for (Eigen::Index i = 0; i < d; ++i)
    out(Eigen::Index(std::uint64_t(i) ^ m.x)) = base * sign_of(std::uint64_t(i), m.yz) * in(i);
}

cplx PauliString::trace_with(const Matrix& mat) const {
  Eigen::Index d = Eigen::Index(1) << qubits();
  if (mat.rows() != d || mat.cols() != d)
    throw shape_error("operator dimension mismatch in pauli trace");
  Masks m = string_masks(letters_);
  cplx base = kIPow[m.ny & 3];
  cplx sum = 0.0;
  for (Eigen::Index k = 0; k < d; ++k)
    sum += mat(k, Eigen::Index(std::uint64_t(k) ^ m.x)) * sign_of(std::uint64_t(k), m.yz);
  return base * sum;
}

double PauliString::expectation(const Vector& v) const {
  Eigen::Index d = Eigen::Index(1) << qubits();
  if (v.size() != d) throw shape_error("state dimension mismatch in pauli expectation");
  Masks m = string_masks(letters_);
  cplx base = kIPow[m.ny & 3];
  cplx sum = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    sum += std::conj(v(Eigen::Index(std::uint64_t(i) ^ m.x))) * sign_of(std::uint64_t(i), m.yz) * v(i);
  return (base * sum).real();
}

double PauliString::expectation(const Matrix& rho) const { return trace_with(rho).real(); }

PauliString PauliString::embed(int qubits, const std::vector<int>& targets) const {
  if (int(targets.size()) != this->qubits())
    throw shape_error("target count does not match pauli string length");
  std::vector<PauliLetter> out(size_t(qubits), PauliLetter::I);
  for (size_t k = 0; k < targets.size(); ++k) {
    int q = targets[k];
    if (q < 0 || q >= qubits) throw shape_error("target qubit out of range");
    if (out[size_t(q)] != PauliLetter::I) throw shape_error("duplicate target qubit");
    out[size_t(q)] = letters_[k];
  }
  return PauliString(std::move(out));
}

std::pair<cplx, PauliString> pauli_product(const PauliString& a, const PauliString& b) {
  if (a.qubits() != b.qubits()) throw shape_error("pauli product needs equal qubit counts");
  std::vector<PauliLetter> out(size_t(a.qubits()));
  int phase = 0;
  for (int q = 0; q < a.qubits(); ++q) {
    int la = int(a.letter(q)), lb = int(b.letter(q));
    out[size_t(q)] = PauliLetter(kProdLetter[la][lb]);
    phase += kProdPhase[la][lb];
  }
  return {kIPow[phase & 3], PauliString(std::move(out))};
}

PauliObservable::PauliObservable(int qubits, std::vector<PauliTerm> terms)
    : qubits_(qubits), terms_(std::move(terms)) {
  if (qubits_ < 1) throw shape_error("qubit count must be positive");
  for (const PauliTerm& t : terms_)
    if (t.string.qubits() != qubits_)
      throw shape_error("pauli term qubit count mismatch");
}

void PauliObservable::add_term(double coeff, PauliString s) {
  if (s.qubits() != qubits_) throw shape_error("pauli term qubit count mismatch");
  terms_.push_back({coeff, std::move(s)});
}

PauliObservable PauliObservable::parse(std::string_view text) {
  std::string compact;
  compact.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  if (compact.empty()) throw std::invalid_argument("empty pauli observable text");

  // Split on '+' that separates terms; a '+' right after an exponent marker
  // belongs to a coefficient like 1e+3.
  std::vector<std::string> parts;
  std::string cur;
  for (size_t i = 0; i < compact.size(); ++i) {
    char c = compact[i];
    if (c == '+' && !cur.empty() &&
        !(cur.back() == 'e' || cur.back() == 'E')) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);

  std::vector<PauliTerm> terms;
  int qubits = -1;
  for (const std::string& part : parts) {
    size_t star = part.find('*');
    if (star == std::string::npos || star == 0 || star + 1 >= part.size())
      throw std::invalid_argument("pauli term '" + part + "' is not coefficient*letters");
    const std::string num = part.substr(0, star);
    char* end = nullptr;
    double coeff = std::strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size())
      throw std::invalid_argument("bad coefficient '" + num + "' in pauli observable");
    PauliString s(std::string_view(part).substr(star + 1));
    if (qubits < 0) qubits = s.qubits();
    if (s.qubits() != qubits)
      throw std::invalid_argument("pauli terms have inconsistent lengths");
    terms.push_back({coeff, std::move(s)});
  }
  return PauliObservable(qubits, std::move(terms));
}

std::string PauliObservable::str() const {
  if (terms_.empty()) return "0*" + PauliString::identity(qubits_).str();
  std::string out;
  char buf[64];
  for (size_t k = 0; k < terms_.size(); ++k) {
    if (k) out += " + ";
    std::snprintf(buf, sizeof buf, "%.17g", terms_[k].coeff);
    out += buf;
    out += '*';
    out += terms_[k].string.str();
  }
  return out;
}

Matrix PauliObservable::matrix() const {
  Eigen::Index d = dim();
  Matrix out = Matrix::Zero(d, d);
  for (const PauliTerm& t : terms_) {
    Masks m = string_masks(t.string.letters());
    cplx base = double(t.coeff) * kIPow[m.ny & 3];
    for (Eigen::Index i = 0; i < d; ++i)
      out(Eigen::Index(std::uint64_t(i) ^ m.x), i) += base * sign_of(std::uint64_t(i), m.yz);
  }
  return out;
}

double PauliObservable::expectation(const DensityMatrix& rho) const {
  if (rho.dim() != dim()) throw shape_error("state dimension mismatch in expectation");
  double sum = 0.0;
  for (const PauliTerm& t : terms_) sum += t.coeff * t.string.expectation(rho.matrix());
  return sum;
}

double PauliObservable::expectation(const Vector& pure) const {
  if (pure.size() != dim()) throw shape_error("state dimension mismatch in expectation");
  double sum = 0.0;
  for (const PauliTerm& t : terms_) sum += t.coeff * t.string.expectation(pure);
  return sum;
}

bool PauliObservable::is_zero() const {
  for (const PauliTerm& t : terms_)
    if (t.coeff != 0.0) return false;
  return true;
}

std::vector<PauliString> pauli_basis(int qubits) {
  if (qubits < 1) throw shape_error("qubit count must be positive");
  size_t count = size_t(1) << (2 * qubits);
  std::vector<PauliString> out;
  out.reserve(count);
  for (size_t idx = 0; idx < count; ++idx) {
    std::vector<PauliLetter> letters(static_cast<size_t>(qubits));
    size_t rem = idx;
    for (int q = qubits - 1; q >= 0; --q) {
      letters[size_t(q)] = PauliLetter(rem & 3);
      rem >>= 2;
    }
    out.emplace_back(std::move(letters));
  }
  return out;
}

std::vector<PauliString> pauli_basis_bounded(int qubits, int max_weight) {
  std::vector<PauliString> out;
  for (PauliString& s : pauli_basis(qubits))
    if (s.weight() <= max_weight) out.push_back(std::move(s));
  return out;
}

RotationGate::RotationGate(std::vector<int> targets, PauliString axis, double angle)
    : targets_(std::move(targets)), axis_(std::move(axis)), angle_(angle) {
  if (targets_.size() != 1 && targets_.size() != 2)
    throw shape_error("rotation gate takes one or two targets");
  if (targets_.size() == 2 && targets_[0] == targets_[1])
    throw shape_error("rotation gate targets must be distinct");
  if (axis_.qubits() != int(targets_.size()))
    throw shape_error("axis length must match target count");
  for (int k = 0; k < axis_.qubits(); ++k)
    if (axis_.letter(k) == PauliLetter::I)
      throw std::invalid_argument("rotation axis must act on every target");
}

PauliString RotationGate::embedded_axis(int qubits) const {
  return axis_.embed(qubits, targets_);
}

Matrix RotationGate::unitary(int qubits) const {
  Eigen::Index d = Eigen::Index(1) << qubits;
  double h = 0.5 * angle_;
  Matrix u = std::cos(h) * Matrix::Identity(d, d);
  u += cplx(0.0, std::sin(h)) * embedded_axis(qubits).matrix();
  return u;
}

Matrix RotationGate::derivative(int qubits) const {
  Eigen::Index d = Eigen::Index(1) << qubits;
  double h = 0.5 * angle_;
  Matrix g = -0.5 * std::sin(h) * Matrix::Identity(d, d);
  g += cplx(0.0, 0.5 * std::cos(h)) * embedded_axis(qubits).matrix();
  return g;
}

void RotationGate::apply(const Vector& in, Vector& out, int qubits) const {
  PauliString s = embedded_axis(qubits);
  Vector sv;
  s.apply(in, sv);
  double h = 0.5 * angle_;
  out = std::cos(h) * in + cplx(0.0, std::sin(h)) * sv;
}

std::vector<GateTemplate> gate_vocabulary(int qubits) {
  if (qubits < 1) throw shape_error("qubit count must be positive");
  std::vector<GateTemplate> out;
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  for (int q = 0; q < qubits; ++q)
    for (char l : letters)
      out.push_back({{q}, PauliString(std::string_view(&l, 1))});
  for (int a = 0; a < qubits; ++a)
    for (int b = a + 1; b < qubits; ++b)
      for (char la : letters)
        for (char lb : letters) {
          char pair[2] = {la, lb};
          out.push_back({{a, b}, PauliString(std::string_view(pair, 2))});
        }
  return out;
}

}  // namespace qwgan
