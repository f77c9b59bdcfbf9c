#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gnm/evaluator.hpp"

namespace gnm {

struct OptimizeSpec {
  std::vector<int> free_slots;
  std::map<int, double> fixed_values;
  std::vector<double> initial; // one entry per free slot
  int max_iters = -1;          // -1 means 200 per free parameter
  double xtol = 1e-6;
  double ftol = 1e-9;
  double simplex_offset = 0.05; // radians added per coordinate for the initial simplex

  void validate(int n_params) const {
    if (initial.size() != free_slots.size())
      throw std::invalid_argument("optimize: initial length != free slot count");
    std::vector<bool> seen(static_cast<std::size_t>(n_params), false);
    for (int s : free_slots) {
      if (s < 0 || s >= n_params || seen[static_cast<std::size_t>(s)])
        throw std::invalid_argument("optimize: bad free slot");
      seen[static_cast<std::size_t>(s)] = true;
    }
    for (const auto &[s, v] : fixed_values) {
      (void)v;
      if (s < 0 || s >= n_params || seen[static_cast<std::size_t>(s)])
        throw std::invalid_argument("optimize: fixed slot overlaps or out of range");
      seen[static_cast<std::size_t>(s)] = true;
    }
    for (bool b : seen)
      if (!b)
        throw std::invalid_argument("optimize: free and fixed slots must cover all parameters");
  }
};

struct NmResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
  int n_evals = 0;
};

// Nelder-Mead with the standard alpha=1, gamma=2, rho=1/2, sigma=1/2 moves
// and a deterministic axis-offset initial simplex. Converges when both the
// vertex spread (inf-norm) and the value spread fall under the tolerances.
inline NmResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                            const std::vector<double> &x0, int max_iters, double xtol, double ftol,
                            double simplex_offset = 0.05) {
  const std::size_t n = x0.size();
  NmResult res;
  if (n == 0) {
    res.x = x0;
    res.f = f(x0);
    res.n_evals = 1;
    res.converged = true;
    return res;
  }
  if (max_iters < 0)
    max_iters = 200 * static_cast<int>(n);

  std::vector<std::vector<double>> v(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 1; i <= n; ++i)
    v[i][i - 1] += simplex_offset;
  for (std::size_t i = 0; i <= n; ++i)
    fv[i] = f(v[i]);
  res.n_evals = static_cast<int>(n) + 1;

  auto order = [&]() {
    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      v2[i] = v[idx[i]];
      f2[i] = fv[idx[i]];
    }
    v.swap(v2);
    fv.swap(f2);
  };
  order();

  auto spread_ok = [&]() {
    double dx = 0.0, df = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      df = std::max(df, std::abs(fv[i] - fv[0]));
      for (std::size_t k = 0; k < n; ++k)
        dx = std::max(dx, std::abs(v[i][k] - v[0][k]));
    }
    return dx <= xtol && df <= ftol;
  };

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (res.iterations < max_iters) {
    if (spread_ok()) {
      res.converged = true;
      break;
    }
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        s += v[i][k];
      centroid[k] = s / static_cast<double>(n);
    }
    for (std::size_t k = 0; k < n; ++k)
      xr[k] = 2.0 * centroid[k] - v[n][k];
    double fr = f(xr);
    ++res.n_evals;
    if (fr < fv[0]) {
      for (std::size_t k = 0; k < n; ++k)
        xe[k] = centroid[k] + 2.0 * (xr[k] - centroid[k]);
      double fe = f(xe);
      ++res.n_evals;
      if (fe < fr) {
        v[n] = xe;
        fv[n] = fe;
      } else {
        v[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      v[n] = xr;
      fv[n] = fr;
    } else {
      bool shrink = false;
      if (fr < fv[n]) {
        for (std::size_t k = 0; k < n; ++k)
          xc[k] = centroid[k] + 0.5 * (xr[k] - centroid[k]);
        double fc = f(xc);
        ++res.n_evals;
        if (fc <= fr) {
          v[n] = xc;
          fv[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        for (std::size_t k = 0; k < n; ++k)
          xc[k] = centroid[k] + 0.5 * (v[n][k] - centroid[k]);
        double fc = f(xc);
        ++res.n_evals;
        if (fc < fv[n]) {
          v[n] = xc;
          fv[n] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k)
            v[i][k] = v[0][k] + 0.5 * (v[i][k] - v[0][k]);
          fv[i] = f(v[i]);
          ++res.n_evals;
        }
      }
    }
    order();
    ++res.iterations;
  }
  res.x = v[0];
  res.f = fv[0];
  return res;
}

struct VqeResult {
  std::vector<double> theta_star; // full parameter vector, frozen slots included
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  int n_evals = 0;
};

// Minimize the noisy energy over the free slots of an already-bound
// evaluator. Gates that depend only on frozen slots are simulated once and
// cached; each optimizer step re-runs only the suffix.
inline VqeResult minimize(const CircuitEvaluator &eval, const OptimizeSpec &spec) {
  spec.validate(eval.n_params());
  std::vector<double> full(static_cast<std::size_t>(eval.n_params()), 0.0);
  for (const auto &[slot, value] : spec.fixed_values)
    full[static_cast<std::size_t>(slot)] = value;

  int min_free = eval.n_params();
  for (int s : spec.free_slots)
    min_free = std::min(min_free, s);
  std::size_t boundary = eval.prefix_boundary(min_free);
  detail::ChiState cached = eval.state_after(full, boundary);

  auto assemble = [&](const std::vector<double> &x) {
    std::vector<double> theta = full;
    for (std::size_t i = 0; i < spec.free_slots.size(); ++i)
      theta[static_cast<std::size_t>(spec.free_slots[i])] = x[i];
    return theta;
  };
  auto objective = [&](const std::vector<double> &x) {
    return eval.energy_resume(cached, boundary, assemble(x));
  };

  NmResult nm = nelder_mead(objective, spec.initial, spec.max_iters, spec.xtol, spec.ftol,
                            spec.simplex_offset);
  VqeResult out;
  out.theta_star = assemble(nm.x.empty() ? spec.initial : nm.x);
  out.energy = nm.f;
  out.iterations = nm.iterations;
  out.converged = nm.converged;
  out.n_evals = nm.n_evals;
  return out;
}

inline VqeResult minimize(const Circuit &circuit, const QubitHamiltonian &h, const NoiseSpec &noise,
                          const OptimizeSpec &spec, std::uint64_t initial_state) {
  CircuitEvaluator eval(circuit, h, noise, initial_state);
  return minimize(eval, spec);
}

inline double energy_at(const Circuit &circuit, const QubitHamiltonian &h, const NoiseSpec &noise,
                        const std::vector<double> &theta, std::uint64_t initial_state) {
  return CircuitEvaluator(circuit, h, noise, initial_state).energy(theta);
}

// Convenience spec: optimize every slot from the given start point.
inline OptimizeSpec all_free(int n_params, const std::vector<double> &initial) {
  OptimizeSpec spec;
  spec.free_slots.resize(static_cast<std::size_t>(n_params));
  std::iota(spec.free_slots.begin(), spec.free_slots.end(), 0);
  spec.initial = initial;
  return spec;
}

} // namespace gnm
