#pragma once

#include <array>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "gnm/ansatz.hpp"
#include "gnm/evaluator.hpp"
#include "gnm/transpiler.hpp"
#include "gnm/vqe.hpp"

namespace gnm {

struct SnippetPlan {
  std::vector<int> ones;
  std::vector<std::array<int, 2>> twos;
  std::vector<std::array<int, 3>> threes;
};

namespace detail {

// Deterministic partial Fisher-Yates draw of `cap` elements without
// replacement, returned in the original enumeration order. std::shuffle is
// avoided because its output is implementation-defined.
template <typename T>
inline void subsample(std::vector<T> &items, int cap, std::mt19937_64 &rng) {
  if (cap < 0 || static_cast<std::size_t>(cap) >= items.size())
    return;
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (int i = 0; i < cap; ++i) {
    std::size_t j = static_cast<std::size_t>(i) + rng() % (idx.size() - static_cast<std::size_t>(i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(cap));
  std::sort(idx.begin(), idx.end());
  std::vector<T> kept;
  kept.reserve(idx.size());
  for (std::size_t i : idx)
    kept.push_back(items[i]);
  items = std::move(kept);
}

} // namespace detail

// Snippet inventory over an N-operator ansatz: every single operator, every
// ordered pair, and consecutive triples. Caps subsample with one seeded
// stream, pairs drawn before triples.
inline SnippetPlan enumerate_snippets(int n_ops, int max_2p, int max_3p, std::uint64_t seed) {
  SnippetPlan plan;
  for (int j = 0; j < n_ops; ++j)
    plan.ones.push_back(j);
  for (int j = 0; j < n_ops; ++j)
    for (int k = j + 1; k < n_ops; ++k)
      plan.twos.push_back({j, k});
  for (int j = 0; j + 2 < n_ops; ++j)
    plan.threes.push_back({j, j + 1, j + 2});
  std::mt19937_64 rng(seed);
  detail::subsample(plan.twos, max_2p, rng);
  detail::subsample(plan.threes, max_3p, rng);
  return plan;
}

struct SremRecord {
  std::vector<int> op_indices;
  int n_params = 0;
  double e_noisy = 0.0;  // full optimization from zero initial parameters
  double e_srem = 0.0;   // e_prime + e_prev_em - e_ref0
  std::optional<double> e_ideal;
  double e_ref0 = 0.0;   // new parameter frozen at zero, priors at their chained optima
  double delta_ref = 0.0;
  double e_partial = 0.0; // last parameter optimized alone
  double e_prime = 0.0;   // warm-start full optimization
  double e_prev_em = 0.0; // mitigated energy inherited from the previous order
  std::vector<double> theta_noisy;
  std::vector<double> theta_prime;
  double theta_partial = 0.0;
  bool converged = false;
};

namespace detail {

inline std::pair<double, bool> ideal_optimum(const CircuitEvaluator &eval, int n_params) {
  auto obj = [&](const std::vector<double> &x) { return eval.ideal_energy(x); };
  NmResult nm = nelder_mead(obj, std::vector<double>(static_cast<std::size_t>(n_params), 0.0),
                            200 * n_params, 1e-6, 1e-9, 0.05);
  return {nm.f, nm.converged};
}

} // namespace detail

// One snippet of the reference-error cascade. `prior_theta` are the chained
// optima of the first n-1 parameters and `prior_em` the mitigated energy of
// the snippet they came from (the mean-field energy at order one).
inline SremRecord srem_snippet(const AnsatzSpec &ansatz, const QubitHamiltonian &h,
                               const DeviceProfile &device, const NoiseSpec &noise,
                               const std::vector<int> &indices,
                               const std::vector<double> &prior_theta, double prior_em,
                               bool prior_converged, bool with_ideal) {
  const int n = static_cast<int>(indices.size());
  if (n < 1 || n > 3)
    throw std::invalid_argument("srem_snippet: order must be 1, 2 or 3");
  if (static_cast<int>(prior_theta.size()) != n - 1)
    throw std::invalid_argument("srem_snippet: prior parameter count mismatch");

  SremRecord rec;
  rec.op_indices = indices;
  rec.n_params = n;
  rec.e_prev_em = prior_em;

  TranspiledCircuit tc = transpile(ansatz.subsequence_circuit(indices), device);
  CircuitEvaluator eval(tc.circuit, h, noise, h.hf_state());

  std::vector<double> ref_point = prior_theta;
  ref_point.push_back(0.0);
  rec.e_ref0 = eval.energy(ref_point);
  rec.delta_ref = rec.e_prev_em - rec.e_ref0;

  if (n == 1) {
    OptimizeSpec cold = all_free(1, {0.0});
    cold.max_iters = 200;
    VqeResult res = minimize(eval, cold);
    rec.e_noisy = res.energy;
    rec.theta_noisy = res.theta_star;
    rec.e_partial = res.energy;
    rec.theta_partial = res.theta_star[0];
    rec.e_prime = res.energy;
    rec.theta_prime = res.theta_star;
    rec.converged = res.converged;
  } else {
    OptimizeSpec part;
    part.initial = {0.0};
    part.free_slots = {n - 1};
    for (int s = 0; s < n - 1; ++s)
      part.fixed_values[s] = prior_theta[static_cast<std::size_t>(s)];
    part.max_iters = 200;
    VqeResult res_part = minimize(eval, part);
    rec.e_partial = res_part.energy;
    rec.theta_partial = res_part.theta_star[static_cast<std::size_t>(n - 1)];

    std::vector<double> warm_init = prior_theta;
    warm_init.push_back(rec.theta_partial);
    OptimizeSpec warm = all_free(n, warm_init);
    warm.max_iters = 200 * n;
    VqeResult res_warm = minimize(eval, warm);
    rec.e_prime = res_warm.energy;
    rec.theta_prime = res_warm.theta_star;

    OptimizeSpec cold = all_free(n, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    cold.max_iters = 200 * n;
    VqeResult res_cold = minimize(eval, cold);
    rec.e_noisy = res_cold.energy;
    rec.theta_noisy = res_cold.theta_star;

    rec.converged = prior_converged && res_part.converged && res_warm.converged && res_cold.converged;
  }
  rec.e_srem = rec.e_prime + rec.e_prev_em - rec.e_ref0;

  if (with_ideal) {
    auto [e_id, ok] = detail::ideal_optimum(eval, n);
    rec.e_ideal = e_id;
    rec.converged = rec.converged && ok;
  }
  return rec;
}

struct LabelConfig {
  int max_2p = -1; // unlimited
  int max_3p = 16;
  std::uint64_t seed = 42;
  bool with_ideal = false;
};

// Label generation over the full snippet plan, one barrier per order so each
// order can chain on the previous one. Records within one order are
// independent and run in parallel; output order matches the plan.
inline std::vector<SremRecord> generate_labels(const AnsatzSpec &ansatz, const QubitHamiltonian &h,
                                               const DeviceProfile &device, const NoiseSpec &noise,
                                               const LabelConfig &cfg) {
  const int n_ops = static_cast<int>(ansatz.ops.size());
  SnippetPlan plan = enumerate_snippets(n_ops, cfg.max_2p, cfg.max_3p, cfg.seed);

  std::vector<SremRecord> ones(plan.ones.size());
  parallel_for(plan.ones.size(), [&](std::size_t i) {
    ones[i] = srem_snippet(ansatz, h, device, noise, {plan.ones[i]}, {}, h.hf_energy, true,
                           cfg.with_ideal);
  });

  std::vector<SremRecord> twos(plan.twos.size());
  parallel_for(plan.twos.size(), [&](std::size_t i) {
    const auto &[j, k] = plan.twos[i];
    const SremRecord &prior = ones[static_cast<std::size_t>(j)];
    twos[i] = srem_snippet(ansatz, h, device, noise, {j, k}, prior.theta_prime, prior.e_srem,
                           prior.converged, cfg.with_ideal);
  });

  std::map<std::pair<int, int>, const SremRecord *> pair_index;
  for (const auto &rec : twos)
    pair_index[{rec.op_indices[0], rec.op_indices[1]}] = &rec;

  std::vector<std::array<int, 3>> feasible;
  for (const auto &t : plan.threes) {
    if (pair_index.count({t[0], t[1]}))
      feasible.push_back(t);
    else
      std::cerr << "labels: skipping triple (" << t[0] << "," << t[1] << "," << t[2]
                << "): prior pair not generated under the pair cap\n";
  }
  std::vector<SremRecord> threes(feasible.size());
  parallel_for(feasible.size(), [&](std::size_t i) {
    const auto &[j, k, l] = feasible[i];
    const SremRecord &prior = *pair_index.at({j, k});
    threes[i] = srem_snippet(ansatz, h, device, noise, {j, k, l}, prior.theta_prime, prior.e_srem,
                             prior.converged, cfg.with_ideal);
  });

  std::vector<SremRecord> records;
  records.reserve(ones.size() + twos.size() + threes.size());
  for (auto &r : ones)
    records.push_back(std::move(r));
  for (auto &r : twos)
    records.push_back(std::move(r));
  for (auto &r : threes)
    records.push_back(std::move(r));
  return records;
}

} // namespace gnm
