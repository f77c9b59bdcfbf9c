#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "gnm/circuit.hpp"
#include "gnm/simulator.hpp"
#include "test_util.hpp"

using namespace gnm;
using Catch::Approx;

TEST_CASE("gadget for a single excitation has the expected layout") {
  Circuit c = excitation_circuit(make_single(0, 1), 0, 2);
  // two weight-2 terms (XY and YX), each: 2 basis changes, 1 CNOT, 1 RZ,
  // 1 CNOT, 2 basis changes
  int cnots = 0, rz_param = 0, h_gates = 0, rx_gates = 0;
  for (const auto &g : c.gates) {
    if (g.kind == GateKind::CNOT)
      ++cnots;
    else if (g.kind == GateKind::RZ && g.slot == 0)
      ++rz_param;
    else if (g.kind == GateKind::H)
      ++h_gates;
    else if (g.kind == GateKind::RX)
      ++rx_gates;
  }
  CHECK(cnots == 4);
  CHECK(rz_param == 2);
  CHECK(h_gates == 4);  // X basis in/out on two terms
  CHECK(rx_gates == 4); // Y basis in/out on two terms
  CHECK(c.n_params == 1);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("gadget for a double excitation emits 48 entangling gates") {
  Circuit c = excitation_circuit(make_double(0, 1, 2, 3), 0, 4);
  int cnots = 0, rz_param = 0;
  for (const auto &g : c.gates) {
    if (g.kind == GateKind::CNOT)
      ++cnots;
    if (g.slot >= 0) {
      ++rz_param;
      CHECK(g.kind == GateKind::RZ);
      CHECK(std::abs(g.scale) == Approx(0.25).margin(1e-14)); // -2 * (1/8)
    }
  }
  CHECK(cnots == 48); // 8 weight-4 terms, staircase of 3 CNOTs each way
  CHECK(rz_param == 8);
}

TEST_CASE("gadget realizes exp(theta tau) against the dense oracle") {
  auto check = [](const FermionExcitation &exc, int n, double theta) {
    Eigen::MatrixXcd tau = Eigen::MatrixXcd::Zero(1L << n, 1L << n);
    for (const auto &t : jw_map(exc, n))
      tau += std::complex<double>(0, t.coeff) * testutil::dense_pauli(n, t.pauli);
    // exp(theta * tau) acting on the HF state
    Eigen::MatrixXcd u = (theta * tau).exp();
    long hf = (1L << 2) - 1; // two electrons in these checks
    Eigen::VectorXcd expect = u.col(hf);

    Circuit c = excitation_circuit(exc, 0, n);
    Eigen::VectorXcd got = run_statevector(c, {theta}, static_cast<std::uint64_t>(hf));
    // global phase must also match: gadgets compose plain RZ conjugations
    REQUIRE((got - expect).cwiseAbs().maxCoeff() < 1e-10);
  };
  check(make_double(0, 1, 2, 3), 4, 0.37);
  check(make_double(0, 1, 2, 3), 4, -1.1);
  check(make_single(0, 2), 4, 0.25);
  check(make_single(1, 3), 4, -0.6);
}

TEST_CASE("parameter slots appear in first-use order") {
  Circuit c;
  c.n_qubits = 2;
  c.n_params = 2;
  c.add_rz_param(0, 1, 1.0); // slot 1 before slot 0
  c.add_rz_param(1, 0, 1.0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  Circuit good;
  good.n_qubits = 2;
  good.n_params = 2;
  good.add_rz_param(0, 0, 1.0);
  good.add_rz_param(1, 1, 1.0);
  CHECK_NOTHROW(good.validate());

  Circuit unused;
  unused.n_qubits = 2;
  unused.n_params = 2;
  unused.add_rz_param(0, 0, 1.0);
  CHECK_THROWS_AS(unused.validate(), std::invalid_argument);
}

TEST_CASE("circuit validation rejects bad gates") {
  Circuit c;
  c.n_qubits = 2;
  c.add_cnot(0, 0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  Circuit c2;
  c2.n_qubits = 2;
  c2.add_h(2);
  CHECK_THROWS_AS(c2.validate(), std::invalid_argument);

  Circuit c3;
  c3.n_qubits = 2;
  c3.n_params = 0;
  c3.add_rz_param(0, 0, 1.0);
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);
}

TEST_CASE("append renumbers nothing and keeps the widest parameter count") {
  Circuit a;
  a.n_qubits = 3;
  a.n_params = 1;
  a.add_rz_param(0, 0, 1.0);
  Circuit b;
  b.n_qubits = 3;
  b.n_params = 2;
  b.add_rz_param(1, 0, 1.0);
  b.add_rz_param(2, 1, 1.0);
  a.append(b);
  CHECK(a.n_params == 2);
  CHECK(a.gates.size() == 3);

  Circuit wide;
  wide.n_qubits = 4;
  CHECK_THROWS_AS(a.append(wide), std::invalid_argument);
}

TEST_CASE("resolve_angle binds slot values") {
  Gate g{GateKind::RZ, 0, -1, 0.5, 1, -2.0};
  CHECK(g.resolve_angle({9.0, 0.25}) == Approx(0.0).margin(1e-15));
  Gate fixed{GateKind::RX, 0, -1, 0.7, -1, 0.0};
  CHECK(fixed.resolve_angle({}) == Approx(0.7));
}
