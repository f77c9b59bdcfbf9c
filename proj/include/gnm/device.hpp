#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnm/common.hpp"

namespace gnm {

struct DeviceProfile {
  std::string name;
  int n_qubits = 0;
  std::vector<std::pair<int, int>> coupling; // undirected, as listed in the file
  std::vector<double> s_err;                 // indexed by qubit
  std::map<std::pair<int, int>, double> t_err; // keyed by the ordered pair (min,max)

  bool has_edge(int a, int b) const {
    if (a > b)
      std::swap(a, b);
    return t_err.count({a, b}) != 0;
  }

  double edge_error(int a, int b) const {
    if (a > b)
      std::swap(a, b);
    auto it = t_err.find({a, b});
    if (it == t_err.end())
      throw std::invalid_argument("device: no such coupling edge " + std::to_string(a) + "-" +
                                  std::to_string(b));
    return it->second;
  }

  // Neighbor lists in ascending index order; routing relies on this for its
  // deterministic tie-break.
  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_qubits));
    for (auto [a, b] : coupling) {
      adj[static_cast<std::size_t>(a)].push_back(b);
      adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto &v : adj) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return adj;
  }

  void validate() const {
    if (n_qubits < 1)
      throw std::invalid_argument("device: n_qubits must be positive");
    if (static_cast<int>(s_err.size()) != n_qubits)
      throw std::invalid_argument("device: s_err must cover every qubit");
    for (double e : s_err)
      if (e < 0.0 || e > 1.0)
        throw std::invalid_argument("device: s_err out of [0,1]");
    for (auto [a, b] : coupling) {
      if (a < 0 || b < 0 || a >= n_qubits || b >= n_qubits || a == b)
        throw std::invalid_argument("device: bad coupling pair");
      if (!has_edge(a, b))
        throw std::invalid_argument("device: coupling pair missing t_err entry");
    }
    for (const auto &[k, v] : t_err)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("device: t_err out of [0,1]");
  }
};

inline DeviceProfile device_from_json(const nlohmann::json &j) {
  DeviceProfile d;
  try {
    d.name = j.at("name").get<std::string>();
    d.n_qubits = j.at("n_qubits").get<int>();
    for (const auto &pair : j.at("coupling")) {
      if (!pair.is_array() || pair.size() != 2)
        throw std::invalid_argument("device: coupling entries must be [i, j]");
      d.coupling.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
    d.s_err.assign(static_cast<std::size_t>(d.n_qubits), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(d.n_qubits), false);
    for (const auto &[key, val] : j.at("s_err").items()) {
      int q = std::stoi(key);
      if (q < 0 || q >= d.n_qubits)
        throw std::invalid_argument("device: s_err qubit out of range");
      d.s_err[static_cast<std::size_t>(q)] = val.get<double>();
      seen[static_cast<std::size_t>(q)] = true;
    }
    for (bool b : seen)
      if (!b)
        throw std::invalid_argument("device: s_err missing a qubit entry");
    for (const auto &[key, val] : j.at("t_err").items()) {
      auto dash = key.find('-');
      if (dash == std::string::npos)
        throw std::invalid_argument("device: t_err keys must look like \"i-j\"");
      int a = std::stoi(key.substr(0, dash));
      int b = std::stoi(key.substr(dash + 1));
      if (a > b)
        std::swap(a, b);
      d.t_err[{a, b}] = val.get<double>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("device json: ") + e.what());
  }
  d.validate();
  return d;
}

inline nlohmann::json device_to_json(const DeviceProfile &d) {
  nlohmann::json j;
  j["name"] = d.name;
  j["n_qubits"] = d.n_qubits;
  j["coupling"] = nlohmann::json::array();
  for (auto [a, b] : d.coupling)
    j["coupling"].push_back({a, b});
  j["s_err"] = nlohmann::json::object();
  for (int q = 0; q < d.n_qubits; ++q)
    j["s_err"][std::to_string(q)] = d.s_err[static_cast<std::size_t>(q)];
  j["t_err"] = nlohmann::json::object();
  for (const auto &[k, v] : d.t_err)
    j["t_err"][std::to_string(k.first) + "-" + std::to_string(k.second)] = v;
  return j;
}

inline DeviceProfile load_device(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open device file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw io_error("cannot parse device file " + path + ": " + e.what());
  }
  return device_from_json(j);
}

} // namespace gnm
