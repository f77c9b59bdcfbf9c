#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gnm/chi.hpp"
#include "gnm/evaluator.hpp"
#include "gnm/simulator.hpp"
#include "test_util.hpp"

using namespace gnm;
using Catch::Approx;

namespace {

// Mixed three-qubit workload touching every gate kind, with a SWAP chain in
// the middle so the pair-fusion path gets exercised.
Circuit mixed_circuit() {
  Circuit c;
  c.n_qubits = 3;
  c.n_params = 2;
  c.add_h(0);
  c.add_rx(1, 0.3);
  c.add_cnot(0, 1);
  c.add_rz_param(1, 0, -0.5);
  c.add_cnot(0, 1); // SWAP chain on the same pair
  c.add_cnot(1, 0);
  c.add_cnot(0, 1);
  c.add_ry(2, -0.7);
  c.add_h(2); // adjacent one-qubit gates fuse
  c.add_rx(2, 0.2);
  c.add_cnot(1, 2);
  c.add_rz_param(2, 1, 1.0);
  c.add_x(0);
  return c;
}

QubitHamiltonian three_qubit_h() {
  QubitHamiltonian h;
  h.n_qubits = 3;
  h.n_electrons = 1;
  h.orbital_irreps = {0, 0, 0};
  h.terms = {{0.5, "III"}, {-0.8, "ZII"}, {0.3, "XXI"}, {-0.2, "YYZ"}, {0.15, "ZZZ"}, {0.1, "IXY"}};
  return h;
}

} // namespace

TEST_CASE("statevector simulation of a Bell circuit") {
  Circuit c;
  c.n_qubits = 2;
  c.add_h(0);
  c.add_cnot(0, 1);
  Eigen::VectorXcd psi = run_statevector(c, {}, 0);
  REQUIRE(psi.size() == 4);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(psi(0) - r) < 1e-14);
  CHECK(std::abs(psi(1)) < 1e-14);
  CHECK(std::abs(psi(2)) < 1e-14);
  CHECK(std::abs(psi(3) - r) < 1e-14);
}

TEST_CASE("noiseless density matrix matches the statevector projector") {
  Circuit c = mixed_circuit();
  std::vector<double> theta{0.4, -0.9};
  DensityMatrix rho = run(c, theta, NoiseSpec::none(3), 1);
  Eigen::VectorXcd psi = run_statevector(c, theta, 1);
  Eigen::MatrixXcd proj = psi * psi.adjoint();
  CHECK((rho.mat - proj).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density matrix stays physical under noise") {
  Circuit c = mixed_circuit();
  DensityMatrix rho = run(c, {0.4, -0.9}, NoiseSpec::uniform(3, 0.02, 0.05), 1);
  CHECK(rho.trace_error() < 1e-12);
  CHECK(rho.hermiticity_error() < 1e-12);
  CHECK(rho.min_eigenvalue() > -1e-12);
}

TEST_CASE("full one-qubit depolarization erases the Bloch vector") {
  // p = 3/4 sends rho to I/2
  Circuit c;
  c.n_qubits = 1;
  c.add_x(0);
  QubitHamiltonian h;
  h.n_qubits = 1;
  h.n_electrons = 0;
  h.orbital_irreps = {0};
  h.terms = {{1.0, "Z"}};
  NoiseSpec ns = NoiseSpec::uniform(1, 0.75, 0.0);
  CHECK(energy(c, {}, ns, h, 0) == Approx(0.0).margin(1e-14));
  DensityMatrix rho = run(c, {}, ns, 0);
  CHECK(std::abs(rho.mat(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(rho.mat(1, 1) - 0.5) < 1e-14);
}

TEST_CASE("pauli-transfer energy equals the density-matrix reference") {
  Circuit c = mixed_circuit();
  QubitHamiltonian h = three_qubit_h();
  for (auto &[p1, p2] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {1e-3, 1e-2}, {0.08, 0.11}}) {
    NoiseSpec ns = NoiseSpec::uniform(3, p1, p2);
    for (auto &theta : std::vector<std::vector<double>>{{0.0, 0.0}, {0.7, -0.3}, {-2.1, 1.9}}) {
      double fast = energy(c, theta, ns, h, 1);
      double ref = expectation(h, run(c, theta, ns, 1));
      CHECK(fast == Approx(ref).margin(1e-12));
    }
  }
}

TEST_CASE("evaluator ideal path matches the statevector reference") {
  Circuit c = mixed_circuit();
  QubitHamiltonian h = three_qubit_h();
  CircuitEvaluator eval(c, h, NoiseSpec::uniform(3, 1e-3, 1e-2), 1);
  std::vector<double> theta{0.7, -0.3};
  double got = eval.ideal_energy(theta);
  double ref = statevector_expectation(h, run_statevector(c, theta, 1));
  CHECK(got == Approx(ref).margin(1e-12));
}

TEST_CASE("evaluator compacts to the touched qubits only") {
  // circuit acts on qubits 1 and 3 of a 6-qubit register
  Circuit c;
  c.n_qubits = 6;
  c.n_params = 1;
  c.add_h(1);
  c.add_cnot(1, 3);
  c.add_rz_param(3, 0, 1.0);
  QubitHamiltonian h;
  h.n_qubits = 6;
  h.n_electrons = 2;
  h.orbital_irreps = {0, 0, 0, 0, 0, 0};
  // ZIZIII picks up a -1 from untouched occupied qubit 0; IIIIXI dies
  h.terms = {{1.0, "ZIZIII"}, {2.0, "IIIIXI"}, {0.5, "IZIZII"}, {0.25, "IIIIII"}};
  CircuitEvaluator eval(c, h, NoiseSpec::none(6), h.hf_state());
  CHECK(eval.n_sim() == 2);
  double fast = eval.energy({0.35});
  double ref = expectation(h, run(c, {0.35}, NoiseSpec::none(6), h.hf_state()));
  CHECK(fast == Approx(ref).margin(1e-12));
}

TEST_CASE("evaluator rejects circuits touching too many qubits") {
  Circuit c;
  c.n_qubits = 14;
  for (int q = 0; q < 14; ++q)
    c.add_h(q);
  QubitHamiltonian h;
  h.n_qubits = 14;
  h.n_electrons = 0;
  h.orbital_irreps.assign(14, 0);
  h.terms = {{1.0, std::string(14, 'Z')}};
  CHECK_THROWS_AS(CircuitEvaluator(c, h, NoiseSpec::none(14), 0), std::invalid_argument);
}

TEST_CASE("chi basis state encodes Z expectations of the initial bits") {
  detail::ChiState st = detail::ChiState::basis_state(2, 0b10);
  // labels: I=0, Z on qubit 0 = 3, Z on qubit 1 = 12, ZZ = 15
  CHECK(st.x[0] == 1.0);
  CHECK(st.x[3] == 1.0);   // qubit 0 in |0>
  CHECK(st.x[12] == -1.0); // qubit 1 in |1>
  CHECK(st.x[15] == -1.0);
  CHECK(st.x[1] == 0.0); // X component vanishes for a basis state
}

TEST_CASE("cnot conjugation table is a signed permutation with the known images") {
  const auto &t = detail::cnot_table();
  std::array<bool, 16> hit{};
  for (int i = 0; i < 16; ++i) {
    CHECK(std::abs(t[static_cast<std::size_t>(i)].sign) == 1.0);
    hit[static_cast<std::size_t>(t[static_cast<std::size_t>(i)].out)] = true;
  }
  for (bool b : hit)
    CHECK(b);
  // spot checks: XI -> XX, IZ -> ZZ, ZI -> ZI, IX -> IX (control digit first)
  CHECK(t[1].out == 1 + 4 * 1);
  CHECK(t[1].sign == 1.0);
  CHECK(t[4 * 3].out == 3 + 4 * 3);
  CHECK(t[3].out == 3);
  CHECK(t[4].out == 4);
}

TEST_CASE("pair map composition equals sequential application") {
  std::mt19937_64 rng(7);
  detail::ChiState a = detail::ChiState::basis_state(2, 1);
  for (auto &v : a.x)
    v = uniform_double(rng, -1.0, 1.0);
  detail::ChiState b = a;

  detail::PairMap m1 = detail::pair_map_for_cnot(true, 0.02);
  detail::PairMap m2 = detail::pair_map_for_cnot(false, 0.01);
  detail::chi_apply_pair(a, 0, 1, m1);
  detail::chi_apply_pair(a, 0, 1, m2);
  detail::chi_apply_pair(b, 0, 1, detail::compose_pair(m2, m1));
  for (std::size_t i = 0; i < a.x.size(); ++i)
    CHECK(a.x[i] == Approx(b.x[i]).margin(1e-15));
}

TEST_CASE("noiseless swap chain composes to the digit-swap permutation") {
  detail::PairMap cn_lo = detail::pair_map_for_cnot(true, 0.0);
  detail::PairMap cn_hi = detail::pair_map_for_cnot(false, 0.0);
  detail::PairMap swap = detail::compose_pair(cn_lo, detail::compose_pair(cn_hi, cn_lo));
  for (int i = 0; i < 16; ++i) {
    const int d_lo = i & 3, d_hi = i >> 2;
    CHECK(swap.perm[static_cast<std::size_t>(i)] == d_hi + 4 * d_lo);
    CHECK(swap.coef[static_cast<std::size_t>(i)] == 1.0);
  }
}

TEST_CASE("pair map for a cnot matches the unfused kernel") {
  std::mt19937_64 rng(11);
  detail::ChiState a = detail::ChiState::basis_state(3, 0);
  for (auto &v : a.x)
    v = uniform_double(rng, -1.0, 1.0);
  detail::ChiState b = a;
  // control above target exercises the digit packing
  detail::chi_apply_cnot(a, 2, 0, 0.03);
  detail::chi_apply_pair(b, 0, 2, detail::pair_map_for_cnot(false, 0.03));
  for (std::size_t i = 0; i < a.x.size(); ++i)
    CHECK(a.x[i] == Approx(b.x[i]).margin(1e-15));
}

TEST_CASE("depolarizing strength monotonically damps an off-diagonal observable") {
  Circuit c;
  c.n_qubits = 2;
  c.add_h(0);
  c.add_cnot(0, 1);
  QubitHamiltonian h;
  h.n_qubits = 2;
  h.n_electrons = 0;
  h.orbital_irreps = {0, 0};
  h.terms = {{1.0, "XX"}};
  double prev = 1.1;
  for (double p2 : {0.0, 1e-3, 1e-2, 0.1, 0.3}) {
    double e = energy(c, {}, NoiseSpec::uniform(2, 0.0, p2), h, 0);
    CHECK(e < prev);
    CHECK(e >= -1.0);
    prev = e;
  }
}

TEST_CASE("noise spec lookups and validation") {
  NoiseSpec ns;
  ns.p1 = {0.1, 0.2};
  ns.p2[{0, 1}] = 0.3;
  CHECK(ns.p1_at(1) == Approx(0.2));
  CHECK(ns.p2_at(0, 1) == Approx(0.3));
  CHECK_THROWS_AS(ns.p2_at(1, 0), std::invalid_argument); // directed lookup
  CHECK_THROWS_AS(ns.p1_at(2), std::invalid_argument);
  ns.p1[0] = 1.5;
  CHECK_THROWS_AS(ns.validate(), std::invalid_argument);
}
