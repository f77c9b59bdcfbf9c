#pragma once

#include <algorithm>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnm/common.hpp"
#include "gnm/transpiler.hpp"
#include "gnm/vqe.hpp"

namespace gnm {

struct OperatorPool {
  std::vector<FermionExcitation> doubles;
  std::vector<FermionExcitation> singles;
};

inline bool sz_conserving(const FermionExcitation &e) {
  int occ_alpha = 0, virt_alpha = 0;
  for (int i : e.occupied)
    occ_alpha += (i % 2 == 0);
  for (int a : e.virt)
    virt_alpha += (a % 2 == 0);
  return occ_alpha == virt_alpha;
}

// All Sz-conserving excitations from the closed-shell occupation 0..n_e-1
// into n_e..n-1, enumerated in lexicographic index order. Spatial symmetry
// is not filtered here: doubles are screened by stabilization energy and
// singles by irrep during assembly.
inline OperatorPool build_pool(const QubitHamiltonian &h) {
  if (h.n_electrons % 2 != 0)
    throw std::invalid_argument("build_pool: closed-shell occupation requires even n_electrons");
  OperatorPool pool;
  int ne = h.n_electrons, n = h.n_qubits;
  for (int i = 0; i < ne; ++i)
    for (int j = i + 1; j < ne; ++j)
      for (int a = ne; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          FermionExcitation d = make_double(i, j, a, b);
          if (sz_conserving(d))
            pool.doubles.push_back(d);
        }
  for (int i = 0; i < ne; ++i)
    for (int a = ne; a < n; ++a) {
      FermionExcitation s = make_single(i, a);
      if (sz_conserving(s))
        pool.singles.push_back(s);
    }
  return pool;
}

struct ScreeningRecord {
  FermionExcitation op;
  double e_opt = 0.0;   // E_I, one-parameter noisy optimum
  double e_ref = 0.0;   // E_I^0, noisy energy at theta = 0
  double theta_star = 0.0;
  bool converged = false;
  bool selected = false;

  double stabilization() const { return e_ref - e_opt; }
};

// One-parameter noisy VQE per pool double; an operator is screened in when
// it lowers the noisy reference energy by more than epsilon. Records for
// different operators are independent and computed in parallel.
inline std::vector<ScreeningRecord> screen_doubles(const OperatorPool &pool,
                                                   const QubitHamiltonian &h,
                                                   const DeviceProfile &device,
                                                   const NoiseSpec &noise, double epsilon) {
  if (epsilon <= 0.0)
    throw std::invalid_argument("screen_doubles: epsilon must be positive");
  std::vector<ScreeningRecord> records(pool.doubles.size());
  parallel_for(pool.doubles.size(), [&](std::size_t idx) {
    const FermionExcitation &op = pool.doubles[idx];
    TranspiledCircuit tc = transpile(excitation_circuit(op, 0, h.n_qubits), device);
    CircuitEvaluator eval(tc.circuit, h, noise, h.hf_state());
    ScreeningRecord rec;
    rec.op = op;
    rec.e_ref = eval.energy({0.0});
    OptimizeSpec spec = all_free(1, {0.0});
    VqeResult res = minimize(eval, spec);
    rec.e_opt = res.energy;
    rec.theta_star = res.theta_star[0];
    rec.converged = res.converged;
    rec.selected = rec.converged && (rec.stabilization() > epsilon);
    records[idx] = rec;
  });
  return records;
}

struct AnsatzOp {
  FermionExcitation op;
  int slot = 0;
  double stabilization = 0.0; // zero for singles (not screened)
  double theta_screen = 0.0;
};

struct AnsatzSpec {
  int n_qubits = 0;
  int n_doubles = 0; // N_T
  int n_singles = 0; // M
  double epsilon = 0.0;
  std::vector<AnsatzOp> ops; // doubles by descending stabilization, then singles

  // Circuit for an order-preserving subsequence of the ansatz, parameter
  // slots renumbered 0..len-1. An empty index list gives the full circuit.
  Circuit subsequence_circuit(const std::vector<int> &indices) const {
    std::vector<int> idx = indices;
    if (idx.empty()) {
      idx.resize(ops.size());
      std::iota(idx.begin(), idx.end(), 0);
    }
    Circuit c;
    c.n_qubits = n_qubits;
    c.n_params = static_cast<int>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k > 0 && idx[k] <= idx[k - 1])
        throw std::invalid_argument("ansatz: snippet indices must be strictly increasing");
      if (idx[k] < 0 || idx[k] >= static_cast<int>(ops.size()))
        throw std::invalid_argument("ansatz: snippet index out of range");
      c.append(excitation_circuit(ops[static_cast<std::size_t>(idx[k])].op, static_cast<int>(k), n_qubits));
    }
    return c;
  }

  Circuit full_circuit() const { return subsequence_circuit({}); }
};

// Order the selected doubles by descending stabilization energy (ties by
// index tuple) and append the totally symmetric singles.
inline AnsatzSpec assemble(const std::vector<ScreeningRecord> &records, const OperatorPool &pool,
                           const QubitHamiltonian &h, double epsilon) {
  AnsatzSpec spec;
  spec.n_qubits = h.n_qubits;
  spec.epsilon = epsilon;
  std::vector<const ScreeningRecord *> chosen;
  for (const auto &rec : records)
    if (rec.selected)
      chosen.push_back(&rec);
  std::sort(chosen.begin(), chosen.end(), [](const ScreeningRecord *a, const ScreeningRecord *b) {
    double sa = std::abs(a->stabilization()), sb = std::abs(b->stabilization());
    if (sa != sb)
      return sa > sb;
    if (a->op.occupied != b->op.occupied)
      return a->op.occupied < b->op.occupied;
    return a->op.virt < b->op.virt;
  });
  for (const auto *rec : chosen) {
    AnsatzOp op;
    op.op = rec->op;
    op.slot = static_cast<int>(spec.ops.size());
    op.stabilization = rec->stabilization();
    op.theta_screen = rec->theta_star;
    spec.ops.push_back(op);
  }
  spec.n_doubles = static_cast<int>(spec.ops.size());
  for (const auto &s : pool.singles) {
    int xr = h.orbital_irreps[static_cast<std::size_t>(s.occupied[0])] ^
             h.orbital_irreps[static_cast<std::size_t>(s.virt[0])];
    if (xr != 0)
      continue;
    AnsatzOp op;
    op.op = s;
    op.slot = static_cast<int>(spec.ops.size());
    spec.ops.push_back(op);
  }
  spec.n_singles = static_cast<int>(spec.ops.size()) - spec.n_doubles;
  return spec;
}

inline nlohmann::json ansatz_to_json(const AnsatzSpec &spec) {
  nlohmann::json j;
  j["n_qubits"] = spec.n_qubits;
  j["n_doubles"] = spec.n_doubles;
  j["n_singles"] = spec.n_singles;
  j["epsilon"] = spec.epsilon;
  j["ops"] = nlohmann::json::array();
  for (const auto &op : spec.ops) {
    j["ops"].push_back({{"kind", op.op.kind == ExcitationKind::Single ? "single" : "double"},
                        {"occupied", op.op.occupied},
                        {"virtual", op.op.virt},
                        {"slot", op.slot},
                        {"stabilization", op.stabilization},
                        {"theta_screen", op.theta_screen}});
  }
  return j;
}

inline AnsatzSpec ansatz_from_json(const nlohmann::json &j) {
  AnsatzSpec spec;
  try {
    spec.n_qubits = j.at("n_qubits").get<int>();
    spec.n_doubles = j.at("n_doubles").get<int>();
    spec.n_singles = j.at("n_singles").get<int>();
    spec.epsilon = j.at("epsilon").get<double>();
    for (const auto &o : j.at("ops")) {
      AnsatzOp op;
      op.op.kind = o.at("kind").get<std::string>() == "single" ? ExcitationKind::Single
                                                               : ExcitationKind::Double;
      op.op.occupied = o.at("occupied").get<std::vector<int>>();
      op.op.virt = o.at("virtual").get<std::vector<int>>();
      op.slot = o.at("slot").get<int>();
      op.stabilization = o.value("stabilization", 0.0);
      op.theta_screen = o.value("theta_screen", 0.0);
      op.op.validate(spec.n_qubits);
      spec.ops.push_back(op);
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("ansatz json: ") + e.what());
  }
  if (spec.n_doubles + spec.n_singles != static_cast<int>(spec.ops.size()))
    throw std::invalid_argument("ansatz json: op counts do not add up");
  return spec;
}

inline AnsatzSpec load_ansatz(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open ansatz file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw io_error("cannot parse ansatz file " + path + ": " + e.what());
  }
  return ansatz_from_json(j);
}

} // namespace gnm
