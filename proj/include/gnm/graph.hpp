#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gnm/common.hpp"
#include "gnm/device.hpp"
#include "gnm/transpiler.hpp"

namespace gnm {

// Self-loop-augmented symmetric normalization D^{-1/2} (A + A^T + I) D^{-1/2}
// of the directed multigraph given as (control, target, multiplicity) edges.
inline Eigen::MatrixXd normalized_adjacency(int n, const std::vector<std::array<int, 3>> &edges) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto &e : edges) {
    if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n || e[0] == e[1] || e[2] <= 0)
      throw std::invalid_argument("normalized_adjacency: malformed edge");
    a(e[0], e[1]) += e[2];
  }
  Eigen::MatrixXd sym = a + a.transpose();
  sym += Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd dinv = sym.rowwise().sum().cwiseSqrt().cwiseInverse();
  return dinv.asDiagonal() * sym * dinv.asDiagonal();
}

struct CircuitGraph {
  int n = 0;
  std::vector<std::array<int, 3>> edges; // control, target, multiplicity; first-use order
  Eigen::MatrixXd x_g;                   // device-error annotation
  Eigen::MatrixXd s;                     // normalized adjacency
};

// Graph of a routed circuit: one node per physical qubit, one directed edge
// per distinct (control, target) with its occurrence count. Error rates
// annotate only qubits and couplings that actually carry an entangling gate.
inline CircuitGraph build_graph(const TranspiledCircuit &tc, const DeviceProfile &device) {
  if (tc.circuit.n_qubits != device.n_qubits)
    throw std::invalid_argument("build_graph: circuit and device size mismatch");
  CircuitGraph g;
  g.n = device.n_qubits;
  std::map<std::pair<int, int>, std::size_t> pos;
  std::vector<char> used(static_cast<std::size_t>(g.n), 0);
  for (const auto &gate : tc.circuit.gates) {
    if (gate.kind != GateKind::CNOT)
      continue;
    if (!device.has_edge(gate.q0, gate.q1))
      throw std::invalid_argument("build_graph: entangling gate off the coupling map");
    auto key = std::make_pair(gate.q0, gate.q1);
    auto it = pos.find(key);
    if (it == pos.end()) {
      pos.emplace(key, g.edges.size());
      g.edges.push_back({gate.q0, gate.q1, 1});
    } else {
      ++g.edges[it->second][2];
    }
    used[static_cast<std::size_t>(gate.q0)] = 1;
    used[static_cast<std::size_t>(gate.q1)] = 1;
  }
  g.x_g = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int q = 0; q < g.n; ++q)
    if (used[static_cast<std::size_t>(q)])
      g.x_g(q, q) = device.s_err[static_cast<std::size_t>(q)];
  for (const auto &e : g.edges)
    g.x_g(e[0], e[1]) = device.edge_error(e[0], e[1]);
  g.s = normalized_adjacency(g.n, g.edges);
  return g;
}

struct RegressionFeatures {
  double n_c = 0.0; // noisy expectation value, hartree
  double t_c = 0.0; // entangling gate count
  double s_c = 0.0; // single-qubit gate count
  double p_c = 0.0; // variational parameter count

  Eigen::Vector4d vec() const { return {n_c, t_c, s_c, p_c}; }
};

inline RegressionFeatures build_features(const TranspiledCircuit &tc, double e_noisy) {
  RegressionFeatures f;
  f.n_c = e_noisy;
  f.t_c = tc.t_c;
  f.s_c = tc.s_c;
  f.p_c = tc.circuit.n_params;
  return f;
}

struct TrainingSample {
  CircuitGraph graph;
  RegressionFeatures features;
  double label = 0.0;
  std::string label_kind; // "srem" or "ideal"
};

struct Scaler {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Vector4d std = Eigen::Vector4d::Ones();
  double label_mean = 0.0;
  double label_std = 1.0;

  Eigen::Vector4d transform(const Eigen::Vector4d &x) const {
    return (x - mean).cwiseQuotient(std);
  }
  Eigen::Vector4d inverse(const Eigen::Vector4d &z) const { return mean + z.cwiseProduct(std); }
  double transform_label(double y) const { return (y - label_mean) / label_std; }
  double inverse_label(double z) const { return label_mean + z * label_std; }
};

// Z-score fit over features and labels; zero-variance columns keep unit
// scale so the transform stays invertible.
inline Scaler fit_scaler(const std::vector<TrainingSample> &samples) {
  if (samples.empty())
    throw std::invalid_argument("fit_scaler: no samples");
  Scaler sc;
  const double n = static_cast<double>(samples.size());
  Eigen::Vector4d sum = Eigen::Vector4d::Zero(), sq = Eigen::Vector4d::Zero();
  double lsum = 0.0, lsq = 0.0;
  for (const auto &s : samples) {
    Eigen::Vector4d v = s.features.vec();
    sum += v;
    sq += v.cwiseProduct(v);
    lsum += s.label;
    lsq += s.label * s.label;
  }
  sc.mean = sum / n;
  Eigen::Vector4d var = sq / n - sc.mean.cwiseProduct(sc.mean);
  for (int i = 0; i < 4; ++i)
    sc.std[i] = var[i] > 0.0 ? std::sqrt(var[i]) : 1.0;
  sc.label_mean = lsum / n;
  double lvar = lsq / n - sc.label_mean * sc.label_mean;
  sc.label_std = lvar > 0.0 ? std::sqrt(lvar) : 1.0;
  return sc;
}

inline std::pair<std::vector<TrainingSample>, Scaler>
standardize(const std::vector<TrainingSample> &samples) {
  Scaler sc = fit_scaler(samples);
  std::vector<TrainingSample> out = samples;
  for (auto &s : out) {
    Eigen::Vector4d z = sc.transform(s.features.vec());
    s.features = {z[0], z[1], z[2], z[3]};
    s.label = sc.transform_label(s.label);
  }
  return {std::move(out), sc};
}

inline nlohmann::json sample_to_json(const TrainingSample &s) {
  nlohmann::json j;
  j["n"] = s.graph.n;
  j["edges"] = nlohmann::json::array();
  for (const auto &e : s.graph.edges)
    j["edges"].push_back({e[0], e[1], e[2]});
  j["x_g"] = nlohmann::json::array();
  for (int r = 0; r < s.graph.n; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < s.graph.n; ++c)
      row.push_back(s.graph.x_g(r, c));
    j["x_g"].push_back(row);
  }
  j["x_r"] = {s.features.n_c, s.features.t_c, s.features.s_c, s.features.p_c};
  j["label"] = s.label;
  j["label_kind"] = s.label_kind;
  return j;
}

inline TrainingSample sample_from_json(const nlohmann::json &j) {
  TrainingSample s;
  try {
    s.graph.n = j.at("n").get<int>();
    if (s.graph.n <= 0)
      throw std::invalid_argument("sample json: n must be positive");
    for (const auto &e : j.at("edges"))
      s.graph.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
    s.graph.x_g = Eigen::MatrixXd::Zero(s.graph.n, s.graph.n);
    const auto &xg = j.at("x_g");
    if (static_cast<int>(xg.size()) != s.graph.n)
      throw std::invalid_argument("sample json: x_g row count mismatch");
    for (int r = 0; r < s.graph.n; ++r) {
      if (static_cast<int>(xg[static_cast<std::size_t>(r)].size()) != s.graph.n)
        throw std::invalid_argument("sample json: x_g column count mismatch");
      for (int c = 0; c < s.graph.n; ++c)
        s.graph.x_g(r, c) = xg[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    const auto &xr = j.at("x_r");
    if (xr.size() != 4)
      throw std::invalid_argument("sample json: x_r must have 4 entries");
    s.features = {xr[0].get<double>(), xr[1].get<double>(), xr[2].get<double>(),
                  xr[3].get<double>()};
    s.label = j.at("label").get<double>();
    s.label_kind = j.at("label_kind").get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("sample json: ") + e.what());
  }
  s.graph.s = normalized_adjacency(s.graph.n, s.graph.edges);
  return s;
}

inline void write_samples(const std::string &path, const std::vector<TrainingSample> &samples) {
  std::ofstream out(path);
  if (!out)
    throw io_error("cannot open for writing: " + path);
  for (const auto &s : samples)
    out << sample_to_json(s).dump() << "\n";
  if (!out)
    throw io_error("write failed: " + path);
}

inline std::vector<TrainingSample> load_samples(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open samples file: " + path);
  std::vector<TrainingSample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw io_error("cannot parse sample line in " + path + ": " + e.what());
    }
    samples.push_back(sample_from_json(j));
  }
  return samples;
}

} // namespace gnm
