#include <catch2/catch_amalgamated.hpp>

#include "gnm/ansatz.hpp"
#include "gnm/vqe.hpp"
#include "test_util.hpp"

using namespace gnm;
using Catch::Approx;

TEST_CASE("nelder-mead minimizes a shifted quadratic") {
  auto f = [](const std::vector<double> &x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 2.0) * (x[1] + 2.0) + 3.0;
  };
  NmResult r = nelder_mead(f, {0.0, 0.0}, -1, 1e-6, 1e-9);
  CHECK(r.converged);
  CHECK(r.x[0] == Approx(1.0).margin(1e-4));
  CHECK(r.x[1] == Approx(-2.0).margin(1e-4));
  CHECK(r.f == Approx(3.0).margin(1e-8));
  CHECK(r.n_evals > 0);
}

TEST_CASE("nelder-mead on a rosenbrock valley stays below the start") {
  auto f = [](const std::vector<double> &x) {
    double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  NmResult r = nelder_mead(f, {-1.2, 1.0}, 2000, 1e-8, 1e-12);
  CHECK(r.f < f({-1.2, 1.0}));
  CHECK(r.f < 1e-6);
}

TEST_CASE("nelder-mead never returns a value above the initial point") {
  auto f = [](const std::vector<double> &x) { return std::cos(3.0 * x[0]) + 0.1 * x[0] * x[0]; };
  for (double x0 : {-2.0, -0.5, 0.0, 0.7, 3.1}) {
    NmResult r = nelder_mead(f, {x0}, 50, 1e-6, 1e-9);
    CHECK(r.f <= f({x0}) + 1e-15);
  }
}

TEST_CASE("zero-parameter optimization is a single evaluation") {
  int calls = 0;
  auto f = [&](const std::vector<double> &) {
    ++calls;
    return 4.2;
  };
  NmResult r = nelder_mead(f, {}, -1, 1e-6, 1e-9);
  CHECK(r.converged);
  CHECK(r.f == Approx(4.2));
  CHECK(calls == 1);
  CHECK(r.n_evals == 1);
}

TEST_CASE("optimize spec validation enforces a slot partition") {
  OptimizeSpec s;
  s.free_slots = {0, 2};
  s.initial = {0.0, 0.0};
  s.fixed_values[1] = 0.5;
  CHECK_NOTHROW(s.validate(3));

  OptimizeSpec overlap = s;
  overlap.fixed_values[2] = 0.1;
  CHECK_THROWS_AS(overlap.validate(3), std::invalid_argument);

  OptimizeSpec gap = s;
  gap.fixed_values.clear();
  CHECK_THROWS_AS(gap.validate(3), std::invalid_argument);

  OptimizeSpec wrong_init = s;
  wrong_init.initial = {0.0};
  CHECK_THROWS_AS(wrong_init.validate(3), std::invalid_argument);
}

namespace {

// Two-parameter ansatz circuit over the H2 fixture, shared by the VQE tests.
struct VqeSetup {
  QubitHamiltonian h;
  Circuit circuit;

  VqeSetup() : h(load_hamiltonian(testutil::fixture_path("h2_0740.json"))) {
    circuit.n_qubits = 4;
    circuit.append(excitation_circuit(make_double(0, 1, 2, 3), 0, 4));
    circuit.append(excitation_circuit(make_single(0, 2), 1, 4));
  }
};

} // namespace

TEST_CASE("noiseless vqe on the h2 double reaches fci") {
  VqeSetup s;
  CircuitEvaluator eval(s.circuit, s.h, NoiseSpec::none(4), s.h.hf_state());
  VqeResult r = minimize(eval, all_free(2, {0.0, 0.0}));
  CHECK(r.converged);
  REQUIRE(s.h.fci_energy.has_value());
  CHECK(r.energy == Approx(*s.h.fci_energy).margin(1e-6));
  CHECK(r.theta_star.size() == 2);
}

TEST_CASE("frozen slots are held at their fixed values") {
  VqeSetup s;
  CircuitEvaluator eval(s.circuit, s.h, NoiseSpec::uniform(4, 1e-3, 1e-2), s.h.hf_state());
  OptimizeSpec spec;
  spec.free_slots = {1};
  spec.fixed_values[0] = 0.22;
  spec.initial = {0.0};
  VqeResult r = minimize(eval, spec);
  CHECK(r.theta_star[0] == 0.22);
  // energy must equal a direct evaluation at the reported optimum
  CHECK(r.energy == eval.energy(r.theta_star));
}

TEST_CASE("prefix caching is bit-identical to full evaluation") {
  VqeSetup s;
  CircuitEvaluator eval(s.circuit, s.h, NoiseSpec::uniform(4, 1e-3, 1e-2), s.h.hf_state());
  std::vector<double> full{0.22, 0.0};
  std::size_t boundary = eval.prefix_boundary(1);
  CHECK(boundary > 0);
  CHECK(boundary < eval.n_ops());
  detail::ChiState cached = eval.state_after(full, boundary);
  for (double t1 : {-0.9, -0.1, 0.0, 0.4, 1.3}) {
    std::vector<double> theta{0.22, t1};
    CHECK(eval.energy_resume(cached, boundary, theta) == eval.energy(theta));
  }
}

TEST_CASE("prefix boundary covers the whole circuit when every slot is free") {
  VqeSetup s;
  CircuitEvaluator eval(s.circuit, s.h, NoiseSpec::none(4), s.h.hf_state());
  CHECK(eval.prefix_boundary(0) < eval.n_ops());
  CHECK(eval.prefix_boundary(2) == eval.n_ops());
}

TEST_CASE("fused evaluator agrees with the reference on the vqe workload") {
  VqeSetup s;
  NoiseSpec ns = NoiseSpec::uniform(4, 1e-3, 1e-2);
  CircuitEvaluator eval(s.circuit, s.h, ns, s.h.hf_state());
  // Gadget layouts never put two constant gates on the same support back to
  // back, so fusion must leave this op count untouched.
  CHECK(eval.n_ops() == s.circuit.gates.size());
  for (auto &theta : std::vector<std::vector<double>>{{0.0, 0.0}, {0.3, -0.2}, {-1.0, 0.8}}) {
    double ref = expectation(s.h, run(s.circuit, theta, ns, s.h.hf_state()));
    CHECK(eval.energy(theta) == Approx(ref).margin(1e-12));
  }
}

TEST_CASE("adjacent constant runs and repeated pair gates fuse") {
  VqeSetup s;
  Circuit c;
  c.n_qubits = 4;
  c.add_h(0);
  c.add_rx(0, 0.7);
  c.add_rz(0, 0.3);
  c.add_cnot(2, 3);
  c.add_cnot(3, 2);
  c.add_cnot(2, 3);
  c.add_h(1);
  NoiseSpec ns = NoiseSpec::uniform(4, 1e-3, 1e-2);
  CircuitEvaluator eval(c, s.h, ns, s.h.hf_state());
  CHECK(eval.n_ops() == 3); // 1q run on q0, swap-shaped cnot triple, lone h
  double ref = expectation(s.h, run(c, {}, ns, s.h.hf_state()));
  CHECK(eval.energy({}) == Approx(ref).margin(1e-12));
}

TEST_CASE("vqe energy under noise is above the noiseless optimum") {
  VqeSetup s;
  CircuitEvaluator noiseless(s.circuit, s.h, NoiseSpec::none(4), s.h.hf_state());
  CircuitEvaluator noisy(s.circuit, s.h, NoiseSpec::uniform(4, 1e-3, 1e-2), s.h.hf_state());
  VqeResult r0 = minimize(noiseless, all_free(2, {0.0, 0.0}));
  VqeResult r1 = minimize(noisy, all_free(2, {0.0, 0.0}));
  CHECK(r1.energy > r0.energy);
}
