#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gnm/circuit.hpp"
#include "gnm/pauli.hpp"

namespace gnm {

// Per-gate depolarizing noise. p1 is indexed by qubit. p2 either maps
// directed edges explicitly (device-derived; unknown edge is an error) or
// applies one uniform value to every CNOT (scalar sweep mode).
struct NoiseSpec {
  std::vector<double> p1;
  std::map<std::pair<int, int>, double> p2;
  bool uniform_p2 = false;
  double uniform_p2_value = 0.0;

  static NoiseSpec none(int n_qubits) {
    NoiseSpec ns;
    ns.p1.assign(static_cast<std::size_t>(n_qubits), 0.0);
    ns.uniform_p2 = true;
    ns.uniform_p2_value = 0.0;
    return ns;
  }

  static NoiseSpec uniform(int n_qubits, double p1v, double p2v) {
    NoiseSpec ns;
    ns.p1.assign(static_cast<std::size_t>(n_qubits), p1v);
    ns.uniform_p2 = true;
    ns.uniform_p2_value = p2v;
    return ns;
  }

  double p1_at(int q) const {
    if (q < 0 || q >= static_cast<int>(p1.size()))
      throw std::invalid_argument("noise: qubit outside p1 map");
    return p1[static_cast<std::size_t>(q)];
  }

  double p2_at(int c, int t) const {
    if (uniform_p2)
      return uniform_p2_value;
    auto it = p2.find({c, t});
    if (it == p2.end())
      throw std::invalid_argument("noise: edge " + std::to_string(c) + "->" + std::to_string(t) +
                                  " missing from p2 map");
    return it->second;
  }

  void validate() const {
    for (double p : p1)
      if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("noise: p1 out of [0,1]");
    for (const auto &[k, v] : p2)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("noise: p2 out of [0,1]");
    if (uniform_p2 && (uniform_p2_value < 0.0 || uniform_p2_value > 1.0))
      throw std::invalid_argument("noise: p2 out of [0,1]");
  }
};

struct DensityMatrix {
  int n_qubits = 0;
  Eigen::MatrixXcd mat;

  static DensityMatrix basis_state(int n_qubits, std::uint64_t s) {
    DensityMatrix rho;
    rho.n_qubits = n_qubits;
    long dim = 1L << n_qubits;
    rho.mat = Eigen::MatrixXcd::Zero(dim, dim);
    rho.mat(static_cast<long>(s), static_cast<long>(s)) = 1.0;
    return rho;
  }

  double trace_error() const { return std::abs(mat.trace() - std::complex<double>(1.0, 0.0)); }

  double hermiticity_error() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

namespace detail {

inline Eigen::Matrix2cd gate_matrix_1q(const Gate &g, double angle) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd u;
  switch (g.kind) {
  case GateKind::H:
    u << 1, 1, 1, -1;
    u *= 1.0 / std::sqrt(2.0);
    break;
  case GateKind::X:
    u << 0, 1, 1, 0;
    break;
  case GateKind::RX:
    u << std::cos(angle / 2), -1i * std::sin(angle / 2), -1i * std::sin(angle / 2),
        std::cos(angle / 2);
    break;
  case GateKind::RY:
    u << std::cos(angle / 2), -std::sin(angle / 2), std::sin(angle / 2), std::cos(angle / 2);
    break;
  case GateKind::RZ:
    u << std::exp(-0.5i * angle), 0, 0, std::exp(0.5i * angle);
    break;
  default:
    throw std::logic_error("gate_matrix_1q: not a one-qubit gate");
  }
  return u;
}

// rho -> (U x I) rho (U x I)^dagger for a one-qubit U acting on qubit q.
inline void density_apply_1q(Eigen::MatrixXcd &rho, int q, const Eigen::Matrix2cd &u) {
  const long dim = rho.rows();
  const long bit = 1L << q;
  for (long col = 0; col < dim; ++col) {
    for (long row = 0; row < dim; ++row) {
      if (row & bit)
        continue;
      long row1 = row | bit;
      std::complex<double> a = rho(row, col), b = rho(row1, col);
      rho(row, col) = u(0, 0) * a + u(0, 1) * b;
      rho(row1, col) = u(1, 0) * a + u(1, 1) * b;
    }
  }
  Eigen::Matrix2cd ud = u.adjoint();
  for (long row = 0; row < dim; ++row) {
    for (long col = 0; col < dim; ++col) {
      if (col & bit)
        continue;
      long col1 = col | bit;
      std::complex<double> a = rho(row, col), b = rho(row, col1);
      rho(row, col) = a * ud(0, 0) + b * ud(1, 0);
      rho(row, col1) = a * ud(0, 1) + b * ud(1, 1);
    }
  }
}

inline void density_apply_cnot(Eigen::MatrixXcd &rho, int c, int t) {
  const long dim = rho.rows();
  const long cbit = 1L << c, tbit = 1L << t;
  for (long s = 0; s < dim; ++s)
    if ((s & cbit) && !(s & tbit))
      rho.row(s).swap(rho.row(s | tbit));
  for (long s = 0; s < dim; ++s)
    if ((s & cbit) && !(s & tbit))
      rho.col(s).swap(rho.col(s | tbit));
}

// rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z) on qubit q, using
// sum_P P B P = 2 tr(B) I - B on each 2x2 block of the qubit.
inline void density_depolarize_1q(Eigen::MatrixXcd &rho, int q, double p) {
  if (p == 0.0)
    return;
  const long dim = rho.rows();
  const long bit = 1L << q;
  const double keep = 1.0 - 4.0 * p / 3.0;
  const double mix = 2.0 * p / 3.0;
  for (long col = 0; col < dim; ++col) {
    if (col & bit)
      continue;
    long col1 = col | bit;
    for (long row = 0; row < dim; ++row) {
      if (row & bit)
        continue;
      long row1 = row | bit;
      std::complex<double> b00 = rho(row, col), b11 = rho(row1, col1);
      std::complex<double> tr = b00 + b11;
      rho(row, col) = keep * b00 + mix * tr;
      rho(row1, col1) = keep * b11 + mix * tr;
      rho(row, col1) *= keep;
      rho(row1, col) *= keep;
    }
  }
}

// Uniform 15-Pauli two-qubit depolarizing channel; blockwise it reduces to
// B -> (1 - 16p/15) B + 4p/15 tr(B) I on each 4x4 block of the pair.
inline void density_depolarize_2q(Eigen::MatrixXcd &rho, int qa, int qb, double p) {
  if (p == 0.0)
    return;
  const long dim = rho.rows();
  const long abit = 1L << qa, bbit = 1L << qb;
  const double keep = 1.0 - 16.0 * p / 15.0;
  const double mix = 4.0 * p / 15.0;
  const long sub[4] = {0, abit, bbit, abit | bbit};
  for (long col = 0; col < dim; ++col) {
    if (col & (abit | bbit))
      continue;
    for (long row = 0; row < dim; ++row) {
      if (row & (abit | bbit))
        continue;
      std::complex<double> tr = 0.0;
      for (long k = 0; k < 4; ++k)
        tr += rho(row | sub[k], col | sub[k]);
      for (long rk = 0; rk < 4; ++rk)
        for (long ck = 0; ck < 4; ++ck) {
          std::complex<double> &e = rho(row | sub[rk], col | sub[ck]);
          e = keep * e + (rk == ck ? mix * tr : 0.0);
        }
    }
  }
}

} // namespace detail

// Reference density-matrix propagation. This is the semantic definition of
// the noisy simulation; the fast Pauli-transfer path below must agree with
// it (asserted in tests) and exists only for speed.
inline DensityMatrix run(const Circuit &circuit, const std::vector<double> &theta,
                         const NoiseSpec &noise, std::uint64_t initial_state) {
  if (static_cast<int>(theta.size()) != circuit.n_params)
    throw std::invalid_argument("run: parameter count mismatch");
  noise.validate();
  DensityMatrix rho = DensityMatrix::basis_state(circuit.n_qubits, initial_state);
  for (const auto &g : circuit.gates) {
    if (g.is_two_qubit()) {
      detail::density_apply_cnot(rho.mat, g.q0, g.q1);
      detail::density_depolarize_2q(rho.mat, g.q0, g.q1, noise.p2_at(g.q0, g.q1));
    } else {
      detail::density_apply_1q(rho.mat, g.q0, detail::gate_matrix_1q(g, g.resolve_angle(theta)));
      detail::density_depolarize_1q(rho.mat, g.q0, noise.p1_at(g.q0));
    }
  }
  return rho;
}

// Tr[H rho] via per-term bit masks; O(dim) per Pauli term.
inline double expectation(const QubitHamiltonian &h, const DensityMatrix &rho) {
  long dim = 1L << h.n_qubits;
  if (rho.mat.rows() != dim || rho.mat.cols() != dim)
    throw std::invalid_argument("expectation: dimension mismatch");
  std::complex<double> acc = 0.0;
  for (const auto &term : h.terms) {
    PauliMasks m = pauli_masks(term.pauli);
    std::complex<double> ip = i_power(m.y_count);
    std::complex<double> tr = 0.0;
    for (long t = 0; t < dim; ++t) {
      double sign = (__builtin_popcountll(static_cast<std::uint64_t>(t) & m.phase_mask) & 1) ? -1.0 : 1.0;
      tr += sign * rho.mat(t, t ^ static_cast<long>(m.flip_mask));
    }
    acc += term.coeff * ip * tr;
  }
  if (std::abs(acc.imag()) >= 1e-9)
    throw std::domain_error("expectation: imaginary residue above tolerance");
  return acc.real();
}

// Pure-state oracle used for noiseless references (E_ideal paths).
inline Eigen::VectorXcd run_statevector(const Circuit &circuit, const std::vector<double> &theta,
                                        std::uint64_t initial_state) {
  if (static_cast<int>(theta.size()) != circuit.n_params)
    throw std::invalid_argument("run_statevector: parameter count mismatch");
  using namespace std::complex_literals;
  long dim = 1L << circuit.n_qubits;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(static_cast<long>(initial_state)) = 1.0;
  for (const auto &g : circuit.gates) {
    if (g.is_two_qubit()) {
      const long cbit = 1L << g.q0, tbit = 1L << g.q1;
      for (long s = 0; s < dim; ++s) {
        if ((s & cbit) && !(s & tbit)) {
          std::swap(psi(s), psi(s | tbit));
        }
      }
    } else {
      Eigen::Matrix2cd u = detail::gate_matrix_1q(g, g.resolve_angle(theta));
      const long bit = 1L << g.q0;
      for (long s = 0; s < dim; ++s) {
        if (s & bit)
          continue;
        std::complex<double> a = psi(s), b = psi(s | bit);
        psi(s) = u(0, 0) * a + u(0, 1) * b;
        psi(s | bit) = u(1, 0) * a + u(1, 1) * b;
      }
    }
  }
  return psi;
}

inline double statevector_expectation(const QubitHamiltonian &h, const Eigen::VectorXcd &psi) {
  long dim = 1L << h.n_qubits;
  if (psi.size() != dim)
    throw std::invalid_argument("statevector_expectation: dimension mismatch");
  std::complex<double> acc = 0.0;
  for (const auto &term : h.terms) {
    PauliMasks m = pauli_masks(term.pauli);
    std::complex<double> ip = i_power(m.y_count);
    std::complex<double> val = 0.0;
    for (long s = 0; s < dim; ++s) {
      long s2 = s ^ static_cast<long>(m.flip_mask);
      double sign =
          (__builtin_popcountll(static_cast<std::uint64_t>(s2) & m.phase_mask) & 1) ? -1.0 : 1.0;
      val += std::conj(psi(s)) * ip * sign * psi(s2);
    }
    acc += term.coeff * val;
  }
  return acc.real();
}

} // namespace gnm
