#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gnm/common.hpp"

namespace gnm {

// A Pauli string is a fixed-width word over {I,X,Y,Z}; character position j
// acts on qubit j, and qubit j is bit j (LSB side) of a basis index.
inline bool valid_pauli_string(const std::string &s) {
  for (char c : s)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      return false;
  return true;
}

struct PauliTerm {
  double coeff = 0.0;
  std::string pauli;
};

// Precomputed action of one Pauli string on basis states:
//   P|t> = i^{y_count} * (-1)^{popcount(t & phase_mask)} |t ^ flip_mask>
struct PauliMasks {
  std::uint64_t flip_mask = 0;
  std::uint64_t phase_mask = 0;
  int y_count = 0;
};

inline PauliMasks pauli_masks(const std::string &pauli) {
  PauliMasks m;
  for (std::size_t j = 0; j < pauli.size(); ++j) {
    switch (pauli[j]) {
    case 'I':
      break;
    case 'X':
      m.flip_mask |= (1ull << j);
      break;
    case 'Y':
      m.flip_mask |= (1ull << j);
      m.phase_mask |= (1ull << j);
      ++m.y_count;
      break;
    case 'Z':
      m.phase_mask |= (1ull << j);
      break;
    default:
      throw std::invalid_argument("invalid Pauli character");
    }
  }
  return m;
}

inline std::complex<double> i_power(int k) {
  switch (((k % 4) + 4) % 4) {
  case 0:
    return {1.0, 0.0};
  case 1:
    return {0.0, 1.0};
  case 2:
    return {-1.0, 0.0};
  default:
    return {0.0, -1.0};
  }
}

struct HamiltonianMeta {
  std::string molecule;
  std::string geometry;
  std::string basis;
};

struct QubitHamiltonian {
  int n_qubits = 0;
  int n_electrons = 0;
  double hf_energy = 0.0;
  std::optional<double> fci_energy;
  std::vector<int> orbital_irreps;
  std::string irrep_product = "xor";
  std::vector<PauliTerm> terms;
  HamiltonianMeta meta;

  // Index of the Hartree-Fock computational basis state: the lowest
  // n_electrons spin-orbitals occupied.
  std::uint64_t hf_state() const { return (1ull << n_electrons) - 1ull; }

  void validate() const {
    if (n_qubits < 1 || n_qubits > 63)
      throw std::invalid_argument("hamiltonian: n_qubits out of supported range");
    if (n_electrons < 0 || n_electrons > n_qubits)
      throw std::invalid_argument("hamiltonian: n_electrons out of range");
    if (static_cast<int>(orbital_irreps.size()) != n_qubits)
      throw std::invalid_argument("hamiltonian: orbital_irreps length != n_qubits");
    if (irrep_product != "xor")
      throw std::invalid_argument("hamiltonian: unsupported irrep_product rule");
    std::unordered_map<std::string, int> seen;
    for (const auto &t : terms) {
      if (static_cast<int>(t.pauli.size()) != n_qubits)
        throw std::invalid_argument("hamiltonian: term width != n_qubits");
      if (!valid_pauli_string(t.pauli))
        throw std::invalid_argument("hamiltonian: invalid Pauli character in term");
      if (seen.count(t.pauli))
        throw std::invalid_argument("hamiltonian: duplicate Pauli string " + t.pauli);
      seen[t.pauli] = 1;
    }
  }
};

inline QubitHamiltonian hamiltonian_from_json(const nlohmann::json &j) {
  QubitHamiltonian h;
  try {
    h.n_qubits = j.at("n_qubits").get<int>();
    h.n_electrons = j.at("n_electrons").get<int>();
    h.hf_energy = j.at("hf_energy").get<double>();
    if (j.contains("fci_energy") && !j["fci_energy"].is_null())
      h.fci_energy = j["fci_energy"].get<double>();
    h.orbital_irreps = j.at("orbital_irreps").get<std::vector<int>>();
    h.irrep_product = j.value("irrep_product", std::string("xor"));
    for (const auto &t : j.at("terms")) {
      PauliTerm term;
      term.coeff = t.at("coeff").get<double>();
      term.pauli = t.at("pauli").get<std::string>();
      h.terms.push_back(std::move(term));
    }
    if (j.contains("meta")) {
      const auto &m = j["meta"];
      h.meta.molecule = m.value("molecule", std::string());
      h.meta.geometry = m.value("geometry", std::string());
      h.meta.basis = m.value("basis", std::string());
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("hamiltonian json: ") + e.what());
  }
  h.validate();
  return h;
}

inline nlohmann::json hamiltonian_to_json(const QubitHamiltonian &h) {
  nlohmann::json j;
  j["n_qubits"] = h.n_qubits;
  j["n_electrons"] = h.n_electrons;
  j["hf_energy"] = h.hf_energy;
  if (h.fci_energy)
    j["fci_energy"] = *h.fci_energy;
  j["orbital_irreps"] = h.orbital_irreps;
  j["irrep_product"] = h.irrep_product;
  j["terms"] = nlohmann::json::array();
  for (const auto &t : h.terms)
    j["terms"].push_back({{"coeff", t.coeff}, {"pauli", t.pauli}});
  j["meta"] = {{"molecule", h.meta.molecule}, {"geometry", h.meta.geometry}, {"basis", h.meta.basis}};
  return j;
}

inline QubitHamiltonian load_hamiltonian(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open hamiltonian file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw io_error("cannot parse hamiltonian file " + path + ": " + e.what());
  }
  return hamiltonian_from_json(j);
}

enum class ExcitationKind { Single, Double };

struct FermionExcitation {
  ExcitationKind kind = ExcitationKind::Single;
  std::vector<int> occupied;
  std::vector<int> virt;

  void validate(int n_qubits) const {
    std::size_t want = kind == ExcitationKind::Single ? 1 : 2;
    if (occupied.size() != want || virt.size() != want)
      throw std::invalid_argument("excitation: wrong index count for kind");
    auto check_sorted = [n_qubits](const std::vector<int> &v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0 || v[i] >= n_qubits)
          throw std::invalid_argument("excitation: index out of range");
        if (i > 0 && v[i] <= v[i - 1])
          throw std::invalid_argument("excitation: indices must be strictly increasing");
      }
    };
    check_sorted(occupied);
    check_sorted(virt);
    for (int o : occupied)
      for (int v : virt)
        if (o == v)
          throw std::invalid_argument("excitation: occupied and virtual overlap");
  }

  std::string label() const {
    std::ostringstream os;
    os << (kind == ExcitationKind::Single ? "s" : "d") << "(";
    for (std::size_t i = 0; i < occupied.size(); ++i)
      os << (i ? "," : "") << occupied[i];
    os << "->";
    for (std::size_t i = 0; i < virt.size(); ++i)
      os << (i ? "," : "") << virt[i];
    os << ")";
    return os.str();
  }
};

inline FermionExcitation make_single(int i, int a) {
  FermionExcitation e;
  e.kind = ExcitationKind::Single;
  e.occupied = {i};
  e.virt = {a};
  return e;
}

inline FermionExcitation make_double(int i, int j, int a, int b) {
  FermionExcitation e;
  e.kind = ExcitationKind::Double;
  e.occupied = {i, j};
  e.virt = {a, b};
  return e;
}

namespace detail {

// One Pauli monomial with a complex weight, used while expanding ladder
// operator products. Multiplication tracks the i/-i phases of XY=iZ etc.
struct Monomial {
  std::complex<double> c;
  std::string p;
};

inline void single_pauli_mul(char a, char b, char &out, std::complex<double> &phase) {
  if (a == 'I') {
    out = b;
    return;
  }
  if (b == 'I') {
    out = a;
    return;
  }
  if (a == b) {
    out = 'I';
    return;
  }
  auto rank = [](char c) { return c == 'X' ? 0 : (c == 'Y' ? 1 : 2); };
  int ra = rank(a), rb = rank(b);
  char third = "XYZ"[3 - ra - rb];
  // XY=iZ, YZ=iX, ZX=iY (cyclic), reversed order picks up the minus
  bool cyclic = (rb == (ra + 1) % 3);
  phase *= cyclic ? std::complex<double>(0, 1) : std::complex<double>(0, -1);
  out = third;
}

inline Monomial monomial_mul(const Monomial &l, const Monomial &r) {
  Monomial out;
  out.c = l.c * r.c;
  out.p.resize(l.p.size());
  for (std::size_t q = 0; q < l.p.size(); ++q)
    single_pauli_mul(l.p[q], r.p[q], out.p[q], out.c);
  return out;
}

// Ladder operator a_m or a^dagger_m under Jordan-Wigner with occupied=|1>:
//   a_m      = Z_0..Z_{m-1} (X_m + iY_m)/2
//   a^dag_m  = Z_0..Z_{m-1} (X_m - iY_m)/2
inline std::vector<Monomial> ladder(int m, bool dagger, int n_qubits) {
  std::string base(static_cast<std::size_t>(n_qubits), 'I');
  for (int k = 0; k < m; ++k)
    base[static_cast<std::size_t>(k)] = 'Z';
  Monomial mx{std::complex<double>(0.5, 0.0), base};
  mx.p[static_cast<std::size_t>(m)] = 'X';
  Monomial my{std::complex<double>(0.0, dagger ? -0.5 : 0.5), base};
  my.p[static_cast<std::size_t>(m)] = 'Y';
  return {mx, my};
}

inline void accumulate_product(std::map<std::string, std::complex<double>> &acc,
                               const std::vector<std::vector<Monomial>> &factors, double sign) {
  std::vector<Monomial> partial{Monomial{std::complex<double>(sign, 0.0),
                                         std::string(factors.front().front().p.size(), 'I')}};
  for (const auto &factor : factors) {
    std::vector<Monomial> next;
    next.reserve(partial.size() * factor.size());
    for (const auto &l : partial)
      for (const auto &r : factor)
        next.push_back(monomial_mul(l, r));
    partial = std::move(next);
  }
  for (const auto &m : partial)
    acc[m.p] += m.c;
}

} // namespace detail

// Jordan-Wigner image of the anti-Hermitian generator tau built from the
// excitation, returned as real coefficients r_k with an implicit factor i:
// tau = sum_k (i * r_k) P_k. Sign convention fixed so that a single i->a
// maps to +1/2 X_i Y_a - 1/2 Y_i X_a (Z chain between the endpoints).
inline std::vector<PauliTerm> jw_map(const FermionExcitation &exc, int n_qubits) {
  exc.validate(n_qubits);
  std::map<std::string, std::complex<double>> acc;
  if (exc.kind == ExcitationKind::Single) {
    int i = exc.occupied[0], a = exc.virt[0];
    // tau = a^dag_i a_a - a^dag_a a_i
    detail::accumulate_product(acc, {detail::ladder(i, true, n_qubits), detail::ladder(a, false, n_qubits)}, 1.0);
    detail::accumulate_product(acc, {detail::ladder(a, true, n_qubits), detail::ladder(i, false, n_qubits)}, -1.0);
  } else {
    int i = exc.occupied[0], j = exc.occupied[1];
    int a = exc.virt[0], b = exc.virt[1];
    // tau = a^dag_i a^dag_j a_b a_a - a^dag_a a^dag_b a_j a_i
    detail::accumulate_product(acc,
                               {detail::ladder(i, true, n_qubits), detail::ladder(j, true, n_qubits),
                                detail::ladder(b, false, n_qubits), detail::ladder(a, false, n_qubits)},
                               1.0);
    detail::accumulate_product(acc,
                               {detail::ladder(a, true, n_qubits), detail::ladder(b, true, n_qubits),
                                detail::ladder(j, false, n_qubits), detail::ladder(i, false, n_qubits)},
                               -1.0);
  }
  std::vector<PauliTerm> out;
  for (const auto &[pauli, c] : acc) {
    if (std::abs(c) < 1e-14)
      continue;
    if (std::abs(c.real()) > 1e-12)
      throw std::logic_error("jw_map: generator expansion has a real residue");
    out.push_back(PauliTerm{c.imag(), pauli});
  }
  return out;
}

// Dense matrix restricted to the particle-number sector (or the full space).
// Intended for test oracles and fixture validation, so n_qubits stays small.
inline double exact_ground_energy(const QubitHamiltonian &h, bool restrict_sector = true) {
  if (h.n_qubits > 12)
    throw std::invalid_argument("exact_ground_energy: n_qubits > 12 unsupported");
  std::uint64_t dim = 1ull << h.n_qubits;
  std::vector<std::uint64_t> basis;
  if (restrict_sector) {
    for (std::uint64_t s = 0; s < dim; ++s)
      if (__builtin_popcountll(s) == h.n_electrons)
        basis.push_back(s);
  } else {
    basis.resize(dim);
    for (std::uint64_t s = 0; s < dim; ++s)
      basis[s] = s;
  }
  if (basis.empty())
    throw std::invalid_argument("exact_ground_energy: empty particle-number sector");
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    index[basis[k]] = k;
  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(static_cast<long>(basis.size()), static_cast<long>(basis.size()));
  for (const auto &term : h.terms) {
    PauliMasks m = pauli_masks(term.pauli);
    std::complex<double> ip = i_power(m.y_count);
    for (std::size_t col = 0; col < basis.size(); ++col) {
      std::uint64_t s = basis[col];
      std::uint64_t s2 = s ^ m.flip_mask;
      auto it = index.find(s2);
      if (it == index.end())
        continue;
      double sign = (__builtin_popcountll(s & m.phase_mask) & 1) ? -1.0 : 1.0;
      mat(static_cast<long>(it->second), static_cast<long>(col)) += term.coeff * ip * sign;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(mat, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

} // namespace gnm
