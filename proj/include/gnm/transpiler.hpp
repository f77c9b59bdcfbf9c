#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "gnm/circuit.hpp"
#include "gnm/device.hpp"

namespace gnm {

struct TranspiledCircuit {
  Circuit circuit;             // over physical qubits, width = device size
  std::vector<int> layout;     // logical -> physical (trivial here)
  int s_c = 0;                 // single-qubit gate count
  int t_c = 0;                 // CNOT count
};

namespace detail {

// BFS distances from `target`, neighbors visited in ascending order.
inline std::vector<int> bfs_dist(const std::vector<std::vector<int>> &adj, int target) {
  std::vector<int> dist(adj.size(), -1);
  std::vector<int> queue{target};
  dist[static_cast<std::size_t>(target)] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int u = queue[head];
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

// Shortest path from src to dst; among ties always step to the neighbor of
// lowest index, which makes routing deterministic.
inline std::vector<int> shortest_path(const std::vector<std::vector<int>> &adj, int src, int dst) {
  std::vector<int> dist = bfs_dist(adj, dst);
  if (dist[static_cast<std::size_t>(src)] < 0)
    throw std::runtime_error("transpile: no route between qubits " + std::to_string(src) + " and " +
                             std::to_string(dst));
  std::vector<int> path{src};
  int cur = src;
  while (cur != dst) {
    int best = -1;
    for (int v : adj[static_cast<std::size_t>(cur)]) {
      if (dist[static_cast<std::size_t>(v)] == dist[static_cast<std::size_t>(cur)] - 1) {
        best = v;
        break; // neighbors ascend, first hit is the lowest index
      }
    }
    path.push_back(best);
    cur = best;
  }
  return path;
}

} // namespace detail

// Route a logical circuit onto the device with the trivial layout. Every
// non-adjacent CNOT becomes: SWAP chain moving the control next to the
// target, the adjacent CNOT, and the inverse chain restoring the layout.
// Each SWAP costs 3 CNOTs, so a distance-d CNOT costs 6(d-1)+1.
inline TranspiledCircuit transpile(const Circuit &logical, const DeviceProfile &device) {
  if (logical.n_qubits > device.n_qubits)
    throw std::invalid_argument("transpile: circuit wider than device");
  auto adj = device.adjacency();
  TranspiledCircuit out;
  out.circuit.n_qubits = device.n_qubits;
  out.circuit.n_params = logical.n_params;
  out.layout.resize(static_cast<std::size_t>(logical.n_qubits));
  for (int q = 0; q < logical.n_qubits; ++q)
    out.layout[static_cast<std::size_t>(q)] = q;

  auto emit_cnot = [&](int a, int b) {
    out.circuit.add_cnot(a, b);
    ++out.t_c;
  };
  auto emit_swap = [&](int a, int b) {
    emit_cnot(a, b);
    emit_cnot(b, a);
    emit_cnot(a, b);
  };

  for (const auto &g : logical.gates) {
    if (!g.is_two_qubit()) {
      out.circuit.gates.push_back(g);
      ++out.s_c;
      continue;
    }
    if (device.has_edge(g.q0, g.q1)) {
      emit_cnot(g.q0, g.q1);
      continue;
    }
    std::vector<int> path = detail::shortest_path(adj, g.q0, g.q1);
    std::size_t k = path.size() - 1; // distance in edges, >= 2 here
    for (std::size_t m = 0; m + 2 <= k; ++m)
      emit_swap(path[m], path[m + 1]);
    emit_cnot(path[k - 1], path[k]);
    for (std::size_t m = k - 1; m-- > 0;)
      emit_swap(path[m], path[m + 1]);
  }
  return out;
}

} // namespace gnm
