#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "gnm/chi.hpp"
#include "gnm/circuit.hpp"
#include "gnm/pauli.hpp"
#include "gnm/simulator.hpp"

namespace gnm {

// Bound (circuit, Hamiltonian, noise, initial state) ready for repeated
// energy evaluation. Two compile-time reductions keep the hot path small:
// the simulation runs only on the qubits the circuit touches (untouched
// qubits stay in their initial basis state, so each Hamiltonian term picks
// up a fixed +-1/0 factor from them), and adjacent constant gates on the
// same support are fused - runs of one-qubit gates into a single 3x3 block,
// runs of noisy CNOTs on one pair (SWAP chains) into a single scaled
// permutation. Parameterized rotations stay unfused.
class CircuitEvaluator {
public:
  CircuitEvaluator(const Circuit &circuit, const QubitHamiltonian &h, const NoiseSpec &noise,
                   std::uint64_t initial_state)
      : n_params_(circuit.n_params), n_gates_(circuit.gates.size()) {
    noise.validate();
    std::vector<int> sim_of(static_cast<std::size_t>(circuit.n_qubits), -1);
    std::vector<int> used;
    auto touch = [&](int q) {
      if (sim_of[static_cast<std::size_t>(q)] < 0) {
        sim_of[static_cast<std::size_t>(q)] = static_cast<int>(used.size());
        used.push_back(q);
      }
    };
    for (const auto &g : circuit.gates) {
      touch(g.q0);
      if (g.is_two_qubit())
        touch(g.q1);
    }
    n_sim_ = static_cast<int>(used.size());
    if (n_sim_ > 13)
      throw std::invalid_argument("evaluator: circuit touches too many qubits to simulate");

    for (const auto &g : circuit.gates) {
      const int s0 = sim_of[static_cast<std::size_t>(g.q0)];
      if (g.kind == GateKind::CNOT) {
        const int s1 = sim_of[static_cast<std::size_t>(g.q1)];
        const int qlo = std::min(s0, s1), qhi = std::max(s0, s1);
        detail::PairMap pm = detail::pair_map_for_cnot(s0 == qlo, noise.p2_at(g.q0, g.q1));
        if (!ops_.empty() && ops_.back().kind == OpKind::Pair && ops_.back().q0 == qlo &&
            ops_.back().q1 == qhi) {
          ops_.back().map = detail::compose_pair(pm, ops_.back().map);
        } else {
          Op op;
          op.kind = OpKind::Pair;
          op.q0 = qlo;
          op.q1 = qhi;
          op.map = pm;
          ops_.push_back(op);
        }
      } else if (g.slot >= 0) {
        Op op;
        op.kind = OpKind::ZParam;
        op.q0 = s0;
        op.slot = g.slot;
        op.angle = g.angle;
        op.scale = g.scale;
        op.p = noise.p1_at(g.q0);
        ops_.push_back(op);
      } else {
        detail::Rot3 rot = detail::pauli_rotation(detail::gate_matrix_1q(g, g.angle));
        const double dep = 1.0 - 4.0 * noise.p1_at(g.q0) / 3.0;
        for (auto &row : rot)
          for (auto &v : row)
            v *= dep;
        if (!ops_.empty() && ops_.back().kind == OpKind::Rot && ops_.back().q0 == s0) {
          ops_.back().rot = detail::compose_rot(rot, ops_.back().rot);
        } else {
          Op op;
          op.kind = OpKind::Rot;
          op.q0 = s0;
          op.rot = rot;
          ops_.push_back(op);
        }
      }
      if (g.kind != GateKind::CNOT) {
        SvGate sg;
        sg.kind = g.kind;
        sg.q0 = s0;
        sg.q1 = -1;
        sg.angle = g.angle;
        sg.slot = g.slot;
        sg.scale = g.scale;
        sv_gates_.push_back(sg);
      } else {
        SvGate sg;
        sg.kind = GateKind::CNOT;
        sg.q0 = s0;
        sg.q1 = sim_of[static_cast<std::size_t>(g.q1)];
        sv_gates_.push_back(sg);
      }
    }

    std::uint64_t sim_bits = 0;
    for (int k = 0; k < n_sim_; ++k)
      if (initial_state & (1ull << used[static_cast<std::size_t>(k)]))
        sim_bits |= (1ull << k);
    init_chi_ = detail::ChiState::basis_state(n_sim_, sim_bits);
    init_bits_ = sim_bits;

    std::map<std::size_t, double> by_label;
    for (const auto &term : h.terms) {
      double factor = term.coeff;
      std::size_t label = 0;
      bool dead = false;
      for (int q = 0; q < h.n_qubits && !dead; ++q) {
        char op = term.pauli[static_cast<std::size_t>(q)];
        if (op == 'I')
          continue;
        int sq = q < circuit.n_qubits ? sim_of[static_cast<std::size_t>(q)] : -1;
        if (sq >= 0) {
          int digit = op == 'X' ? 1 : (op == 'Y' ? 2 : 3);
          label += static_cast<std::size_t>(digit) << (2 * sq);
        } else if (op == 'Z') {
          if (initial_state & (1ull << q))
            factor = -factor;
        } else {
          dead = true; // X/Y on an untouched qubit has zero expectation
        }
      }
      if (dead)
        continue;
      if (label == 0)
        offset_ += factor;
      else
        by_label[label] += factor;
    }
    terms_.assign(by_label.begin(), by_label.end());
  }

  int n_sim() const { return n_sim_; }
  int n_params() const { return n_params_; }
  std::size_t n_gates() const { return n_gates_; }
  std::size_t n_ops() const { return ops_.size(); }

  // First fused op whose parameter slot is >= min_slot; everything before
  // it is independent of those parameters and can be cached.
  std::size_t prefix_boundary(int min_slot) const {
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (ops_[i].kind == OpKind::ZParam && ops_[i].slot >= min_slot)
        return i;
    return ops_.size();
  }

  detail::ChiState state_after(const std::vector<double> &theta, std::size_t n_ops) const {
    detail::ChiState st = init_chi_;
    advance(st, 0, n_ops, theta);
    return st;
  }

  double energy_resume(const detail::ChiState &cached, std::size_t op_begin,
                       const std::vector<double> &theta) const {
    detail::ChiState st = cached;
    advance(st, op_begin, ops_.size(), theta);
    return readout(st);
  }

  double energy(const std::vector<double> &theta) const {
    return energy_resume(init_chi_, 0, theta);
  }

  // Noiseless statevector evaluation of the same compacted circuit.
  double ideal_energy(const std::vector<double> &theta) const {
    check_theta(theta);
    const long dim = 1L << n_sim_;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(static_cast<long>(init_bits_)) = 1.0;
    for (const auto &g : sv_gates_) {
      if (g.kind == GateKind::CNOT) {
        const long cbit = 1L << g.q0, tbit = 1L << g.q1;
        for (long s = 0; s < dim; ++s)
          if ((s & cbit) && !(s & tbit))
            std::swap(psi(s), psi(s | tbit));
      } else {
        Gate tmp;
        tmp.kind = g.kind;
        tmp.q0 = g.q0;
        double angle = g.slot < 0 ? g.angle : g.angle + g.scale * theta[static_cast<std::size_t>(g.slot)];
        Eigen::Matrix2cd u = detail::gate_matrix_1q(tmp, angle);
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
    double e = offset_;
    for (const auto &[label, coeff] : terms_) {
      std::uint64_t flip = 0, phase = 0;
      int ycount = 0;
      for (int q = 0; q < n_sim_; ++q) {
        int digit = static_cast<int>((label >> (2 * q)) & 3);
        if (digit == 1)
          flip |= 1ull << q;
        else if (digit == 2) {
          flip |= 1ull << q;
          phase |= 1ull << q;
          ++ycount;
        } else if (digit == 3)
          phase |= 1ull << q;
      }
      std::complex<double> ip = i_power(ycount);
      std::complex<double> val = 0.0;
      for (long s = 0; s < dim; ++s) {
        long s2 = s ^ static_cast<long>(flip);
        double sign = (__builtin_popcountll(static_cast<std::uint64_t>(s2) & phase) & 1) ? -1.0 : 1.0;
        val += std::conj(psi(s)) * ip * sign * psi(s2);
      }
      e += coeff * val.real();
    }
    return e;
  }

private:
  enum class OpKind { Rot, ZParam, Pair };

  struct Op {
    OpKind kind = OpKind::Rot;
    int q0 = 0, q1 = -1; // pair ops keep q0 < q1
    int slot = -1;
    double angle = 0.0, scale = 0.0, p = 0.0;
    detail::Rot3 rot{};
    detail::PairMap map{};
  };

  struct SvGate {
    GateKind kind = GateKind::H;
    int q0 = 0, q1 = -1;
    double angle = 0.0;
    int slot = -1;
    double scale = 0.0;
  };

  void check_theta(const std::vector<double> &theta) const {
    if (static_cast<int>(theta.size()) != n_params_)
      throw std::invalid_argument("evaluator: parameter count mismatch");
  }

  void advance(detail::ChiState &st, std::size_t begin, std::size_t end,
               const std::vector<double> &theta) const {
    check_theta(theta);
    for (std::size_t i = begin; i < end; ++i) {
      const auto &op = ops_[i];
      switch (op.kind) {
      case OpKind::Pair:
        detail::chi_apply_pair(st, op.q0, op.q1, op.map);
        break;
      case OpKind::Rot:
        detail::chi_apply_1q(st, op.q0, op.rot, 0.0);
        break;
      case OpKind::ZParam: {
        Gate tmp;
        tmp.kind = GateKind::RZ;
        tmp.q0 = op.q0;
        double angle = op.angle + op.scale * theta[static_cast<std::size_t>(op.slot)];
        detail::chi_apply_1q(st, op.q0, detail::pauli_rotation(detail::gate_matrix_1q(tmp, angle)),
                             op.p);
        break;
      }
      }
    }
  }

  double readout(const detail::ChiState &st) const {
    double e = offset_;
    for (const auto &[label, coeff] : terms_)
      e += coeff * st.x[label];
    return e;
  }

  std::vector<Op> ops_;
  std::vector<SvGate> sv_gates_;
  std::vector<std::pair<std::size_t, double>> terms_;
  detail::ChiState init_chi_;
  std::uint64_t init_bits_ = 0;
  double offset_ = 0.0;
  int n_sim_ = 0;
  int n_params_ = 0;
  std::size_t n_gates_ = 0;
};

// Noisy energy of a circuit: Tr[H Lambda(U rho U^dag)] evaluated in the
// Pauli-transfer basis; agrees with expectation(h, run(...)) to round-off.
inline double energy(const Circuit &circuit, const std::vector<double> &theta,
                     const NoiseSpec &noise, const QubitHamiltonian &h, std::uint64_t initial_state) {
  return CircuitEvaluator(circuit, h, noise, initial_state).energy(theta);
}

} // namespace gnm
