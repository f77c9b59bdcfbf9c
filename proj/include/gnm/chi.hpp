#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gnm/circuit.hpp"
#include "gnm/simulator.hpp"

namespace gnm {
namespace detail {

// State in the Pauli-transfer representation: x[L] = Tr[P_L rho] with the
// label L = sum_q 4^q l_q, digits I=0, X=1, Y=2, Z=3. Everything is real,
// Clifford gates are signed permutations, rotations are 3x3 blocks, and the
// depolarizing channels are diagonal - which is why the hot path lives here
// instead of on the density matrix.
struct ChiState {
  int n = 0;
  std::vector<double> x;

  static ChiState basis_state(int n, std::uint64_t bits) {
    ChiState st;
    st.n = n;
    st.x.assign(std::size_t(1) << (2 * n), 0.0);
    for (std::uint64_t m = 0; m < (std::uint64_t(1) << n); ++m) {
      std::size_t label = 0;
      for (int q = 0; q < n; ++q)
        if (m & (1ull << q))
          label += std::size_t(3) << (2 * q);
      st.x[label] = (__builtin_popcountll(m & bits) & 1) ? -1.0 : 1.0;
    }
    return st;
  }
};

using Rot3 = std::array<std::array<double, 3>, 3>;

inline Eigen::Matrix2cd pauli_sigma(int k) {
  Eigen::Matrix2cd s;
  using namespace std::complex_literals;
  switch (k) {
  case 0:
    s << 1, 0, 0, 1;
    break;
  case 1:
    s << 0, 1, 1, 0;
    break;
  case 2:
    s << 0, -1i, 1i, 0;
    break;
  default:
    s << 1, 0, 0, -1;
    break;
  }
  return s;
}

// U sigma_k U^dag = sum_m R[m][k] sigma_m for unitary U (k,m over X,Y,Z).
inline Rot3 pauli_rotation(const Eigen::Matrix2cd &u) {
  Rot3 r{};
  for (int k = 1; k <= 3; ++k) {
    Eigen::Matrix2cd conj = u * pauli_sigma(k) * u.adjoint();
    for (int m = 1; m <= 3; ++m)
      r[std::size_t(m - 1)][std::size_t(k - 1)] = 0.5 * (pauli_sigma(m).adjoint() * conj).trace().real();
  }
  return r;
}

struct CnotEntry {
  int out = 0;     // output label pair, control digit + 4*target digit
  double sign = 1; // +-1 from the Pauli conjugation
};

// Conjugation table CNOT (P_c x P_t) CNOT -> +- (P_c' x P_t'), derived
// numerically once so no sign convention can slip in by hand.
inline const std::array<CnotEntry, 16> &cnot_table() {
  static const std::array<CnotEntry, 16> table = [] {
    Eigen::Matrix4cd cnot = Eigen::Matrix4cd::Zero();
    // basis index = 2*control + target
    cnot(0, 0) = 1;
    cnot(1, 1) = 1;
    cnot(2, 3) = 1;
    cnot(3, 2) = 1;
    auto kron2 = [](const Eigen::Matrix2cd &a, const Eigen::Matrix2cd &b) {
      Eigen::Matrix4cd k;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
      return k;
    };
    std::array<CnotEntry, 16> t{};
    for (int lc = 0; lc < 4; ++lc) {
      for (int lt = 0; lt < 4; ++lt) {
        Eigen::Matrix4cd conj = cnot * kron2(pauli_sigma(lc), pauli_sigma(lt)) * cnot;
        bool found = false;
        for (int oc = 0; oc < 4 && !found; ++oc) {
          for (int ot = 0; ot < 4 && !found; ++ot) {
            Eigen::Matrix4cd cand = kron2(pauli_sigma(oc), pauli_sigma(ot));
            for (double sign : {1.0, -1.0}) {
              if ((conj - sign * cand).cwiseAbs().maxCoeff() < 1e-12) {
                t[std::size_t(lc + 4 * lt)] = CnotEntry{oc + 4 * ot, sign};
                found = true;
                break;
              }
            }
          }
        }
        if (!found)
          throw std::logic_error("cnot_table: conjugation did not map to a Pauli");
      }
    }
    return t;
  }();
  return table;
}

// Scaled permutation acting on one qubit pair in the chi basis, packed as
// index i = d_lo + 4*d_hi. A noisy CNOT is one of these, and they are closed
// under composition, so routed SWAP chains on a pair collapse to one pass.
struct PairMap {
  std::array<int, 16> perm{};
  std::array<double, 16> coef{};
};

inline PairMap pair_map_for_cnot(bool control_lo, double p) {
  const double scale = 1.0 - 16.0 * p / 15.0;
  const auto &table = cnot_table();
  PairMap m;
  for (int i = 0; i < 16; ++i) {
    const int d_lo = i & 3, d_hi = i >> 2;
    const int lc = control_lo ? d_lo : d_hi;
    const int lt = control_lo ? d_hi : d_lo;
    const CnotEntry &e = table[std::size_t(lc + 4 * lt)];
    const int oc = e.out & 3, ot = e.out >> 2;
    const int o = control_lo ? (oc + 4 * ot) : (ot + 4 * oc);
    m.perm[std::size_t(i)] = o;
    m.coef[std::size_t(i)] = e.sign * (o == 0 ? 1.0 : scale);
  }
  return m;
}

// first, then second.
inline PairMap compose_pair(const PairMap &second, const PairMap &first) {
  PairMap m;
  for (int i = 0; i < 16; ++i) {
    const int mid = first.perm[std::size_t(i)];
    m.perm[std::size_t(i)] = second.perm[std::size_t(mid)];
    m.coef[std::size_t(i)] = first.coef[std::size_t(i)] * second.coef[std::size_t(mid)];
  }
  return m;
}

// first, then second.
inline Rot3 compose_rot(const Rot3 &second, const Rot3 &first) {
  Rot3 r{};
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k) {
      double acc = 0.0;
      for (int j = 0; j < 3; ++j)
        acc += second[std::size_t(m)][std::size_t(j)] * first[std::size_t(j)][std::size_t(k)];
      r[std::size_t(m)][std::size_t(k)] = acc;
    }
  return r;
}

inline void chi_apply_pair(ChiState &st, int qlo, int qhi, const PairMap &map) {
  const std::size_t slo = std::size_t(1) << (2 * qlo);
  const std::size_t shi = std::size_t(1) << (2 * qhi);
  const std::size_t total = st.x.size();
  double *x = st.x.data();
  double in[16];
  for (std::size_t a = 0; a < total; a += 4 * shi) {
    for (std::size_t b = 0; b < shi; b += 4 * slo) {
      for (std::size_t d = 0; d < slo; ++d) {
        const std::size_t base = a + b + d;
        for (int i = 0; i < 16; ++i)
          in[i] = x[base + std::size_t(i & 3) * slo + std::size_t(i >> 2) * shi];
        for (int i = 0; i < 16; ++i) {
          const int o = map.perm[std::size_t(i)];
          x[base + std::size_t(o & 3) * slo + std::size_t(o >> 2) * shi] =
              map.coef[std::size_t(i)] * in[i];
        }
      }
    }
  }
}

// One-qubit unitary followed by depolarizing with probability p; the
// channel scales the X,Y,Z components by (1 - 4p/3), folded into R.
inline void chi_apply_1q(ChiState &st, int q, const Rot3 &rot, double p) {
  const double scale = 1.0 - 4.0 * p / 3.0;
  double r[3][3];
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k)
      r[m][k] = scale * rot[std::size_t(m)][std::size_t(k)];
  const std::size_t s = std::size_t(1) << (2 * q);
  const std::size_t total = st.x.size();
  double *x = st.x.data();
  for (std::size_t hi = 0; hi < total; hi += 4 * s) {
    for (std::size_t lo = 0; lo < s; ++lo) {
      const std::size_t base = hi + lo;
      const double vx = x[base + s], vy = x[base + 2 * s], vz = x[base + 3 * s];
      x[base + s] = r[0][0] * vx + r[0][1] * vy + r[0][2] * vz;
      x[base + 2 * s] = r[1][0] * vx + r[1][1] * vy + r[1][2] * vz;
      x[base + 3 * s] = r[2][0] * vx + r[2][1] * vy + r[2][2] * vz;
    }
  }
}

// CNOT followed by two-qubit depolarizing with probability p; the channel
// scales the 15 non-identity pair components by (1 - 16p/15).
inline void chi_apply_cnot(ChiState &st, int c, int t, double p) {
  const double scale = 1.0 - 16.0 * p / 15.0;
  const auto &table = cnot_table();
  double coef[16];
  int perm[16];
  for (int l = 0; l < 16; ++l) {
    perm[l] = table[std::size_t(l)].out;
    coef[l] = table[std::size_t(l)].sign * (table[std::size_t(l)].out == 0 ? 1.0 : scale);
  }
  const std::size_t sc = std::size_t(1) << (2 * c);
  const std::size_t stt = std::size_t(1) << (2 * t);
  const std::size_t slo = std::min(sc, stt), shi = std::max(sc, stt);
  const std::size_t total = st.x.size();
  double *x = st.x.data();
  double in[16];
  for (std::size_t a = 0; a < total; a += 4 * shi) {
    for (std::size_t b = 0; b < shi; b += 4 * slo) {
      for (std::size_t d = 0; d < slo; ++d) {
        const std::size_t base = a + b + d;
        for (int lc = 0; lc < 4; ++lc)
          for (int lt = 0; lt < 4; ++lt)
            in[lc + 4 * lt] = x[base + std::size_t(lc) * sc + std::size_t(lt) * stt];
        for (int l = 0; l < 16; ++l) {
          const int o = perm[l];
          x[base + std::size_t(o & 3) * sc + std::size_t(o >> 2) * stt] = coef[l] * in[l];
        }
      }
    }
  }
}

} // namespace detail
} // namespace gnm
