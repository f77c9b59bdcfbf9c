#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnm/pauli.hpp"

namespace gnm {

enum class GateKind { RZ, RY, RX, H, X, CNOT };

inline const char *gate_name(GateKind k) {
  switch (k) {
  case GateKind::RZ:
    return "RZ";
  case GateKind::RY:
    return "RY";
  case GateKind::RX:
    return "RX";
  case GateKind::H:
    return "H";
  case GateKind::X:
    return "X";
  default:
    return "CNOT";
  }
}

// A gate with an optional parameter binding. Rotation gates resolve their
// angle as `angle + scale * theta[slot]`; slot -1 means a constant angle.
struct Gate {
  GateKind kind = GateKind::H;
  int q0 = 0;
  int q1 = -1; // CNOT target
  double angle = 0.0;
  int slot = -1;
  double scale = 0.0;

  bool is_two_qubit() const { return kind == GateKind::CNOT; }
  bool is_rotation() const {
    return kind == GateKind::RZ || kind == GateKind::RY || kind == GateKind::RX;
  }

  double resolve_angle(const std::vector<double> &theta) const {
    if (slot < 0)
      return angle;
    return angle + scale * theta[static_cast<std::size_t>(slot)];
  }
};

struct Circuit {
  int n_qubits = 0;
  int n_params = 0;
  std::vector<Gate> gates;

  void add_h(int q) { gates.push_back(Gate{GateKind::H, q, -1, 0.0, -1, 0.0}); }
  void add_x(int q) { gates.push_back(Gate{GateKind::X, q, -1, 0.0, -1, 0.0}); }
  void add_rx(int q, double angle) { gates.push_back(Gate{GateKind::RX, q, -1, angle, -1, 0.0}); }
  void add_ry(int q, double angle) { gates.push_back(Gate{GateKind::RY, q, -1, angle, -1, 0.0}); }
  void add_rz(int q, double angle) { gates.push_back(Gate{GateKind::RZ, q, -1, angle, -1, 0.0}); }
  void add_rz_param(int q, int slot, double scale) {
    gates.push_back(Gate{GateKind::RZ, q, -1, 0.0, slot, scale});
  }
  void add_cnot(int c, int t) { gates.push_back(Gate{GateKind::CNOT, c, t, 0.0, -1, 0.0}); }

  void append(const Circuit &other) {
    if (other.n_qubits > n_qubits)
      throw std::invalid_argument("circuit append: width mismatch");
    for (const auto &g : other.gates)
      gates.push_back(g);
    if (other.n_params > n_params)
      n_params = other.n_params;
  }

  void validate() const {
    int next_new_slot = 0;
    for (const auto &g : gates) {
      if (g.q0 < 0 || g.q0 >= n_qubits)
        throw std::invalid_argument("circuit: qubit index out of range");
      if (g.is_two_qubit()) {
        if (g.q1 < 0 || g.q1 >= n_qubits || g.q1 == g.q0)
          throw std::invalid_argument("circuit: bad CNOT qubits");
      }
      if (g.slot >= 0) {
        if (!g.is_rotation())
          throw std::invalid_argument("circuit: parameter slot on non-rotation gate");
        if (g.slot >= n_params)
          throw std::invalid_argument("circuit: slot id out of range");
        if (g.slot > next_new_slot)
          throw std::invalid_argument("circuit: slots must appear in first-use order");
        if (g.slot == next_new_slot)
          ++next_new_slot;
      }
    }
    if (next_new_slot != n_params)
      throw std::invalid_argument("circuit: unused parameter slots");
  }
};

// Pauli-gadget realization of exp(theta * tau) for a JW-mapped excitation:
// per term (i * c * P), change X/Y columns into the Z basis, accumulate the
// parity along a CNOT staircase over the support, rotate RZ(-2*c*theta) on
// the last support qubit, then undo. Terms of one excitation commute, so
// the product of gadgets is exact, not a Trotter step.
inline Circuit excitation_circuit(const FermionExcitation &op, int slot, int n_qubits) {
  std::vector<PauliTerm> terms = jw_map(op, n_qubits);
  Circuit c;
  c.n_qubits = n_qubits;
  c.n_params = slot + 1;
  const double half_pi = std::acos(0.0);
  for (const auto &term : terms) {
    std::vector<int> support;
    for (int q = 0; q < n_qubits; ++q)
      if (term.pauli[static_cast<std::size_t>(q)] != 'I')
        support.push_back(q);
    for (int q : support) {
      char p = term.pauli[static_cast<std::size_t>(q)];
      if (p == 'X')
        c.add_h(q);
      else if (p == 'Y')
        c.add_rx(q, half_pi);
    }
    for (std::size_t k = 0; k + 1 < support.size(); ++k)
      c.add_cnot(support[k], support[k + 1]);
    c.add_rz_param(support.back(), slot, -2.0 * term.coeff);
    for (std::size_t k = support.size() - 1; k-- > 0;)
      c.add_cnot(support[k], support[k + 1]);
    for (int q : support) {
      char p = term.pauli[static_cast<std::size_t>(q)];
      if (p == 'X')
        c.add_h(q);
      else if (p == 'Y')
        c.add_rx(q, -half_pi);
    }
  }
  return c;
}

} // namespace gnm
