#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gnm/common.hpp"
#include "gnm/graph.hpp"
#include "gnm/version.hpp"

namespace gnm {

inline double huber_loss(double residual, double delta) {
  if (delta <= 0.0)
    throw std::invalid_argument("huber_loss: delta must be positive");
  double a = std::abs(residual);
  return a <= delta ? 0.5 * residual * residual : delta * (a - 0.5 * delta);
}

inline double huber_grad(double residual, double delta) {
  if (delta <= 0.0)
    throw std::invalid_argument("huber_grad: delta must be positive");
  if (std::abs(residual) <= delta)
    return residual;
  return residual > 0.0 ? delta : -delta;
}

// Two graph-convolution layers pool the annotated circuit graph to one scalar
// per node stack; the readout concatenates it with the standardized circuit
// features and applies a one-hidden-layer regressor with a linear head.
struct GnmParameters {
  Eigen::MatrixXd w_g0; // n x k
  Eigen::MatrixXd w_g1; // k x 1
  Eigen::MatrixXd w0;   // (n + 4) x k_r
  Eigen::VectorXd b0;   // k_r
  Eigen::MatrixXd w1;   // k_r x 1
  double b1 = 0.0;

  int n() const { return static_cast<int>(w_g0.rows()); }
  int k() const { return static_cast<int>(w_g0.cols()); }
  int k_r() const { return static_cast<int>(w0.cols()); }
};

namespace detail {

inline void fill_uniform(Eigen::MatrixXd &m, std::mt19937_64 &rng) {
  const double r = 1.0 / std::sqrt(static_cast<double>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = uniform_double(rng, -r, r);
}

} // namespace detail

// Weights drawn uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) in a fixed tensor
// and row-major element order; biases start at zero.
inline GnmParameters init_parameters(int n, int k, int k_r, std::uint64_t seed) {
  if (n <= 0 || k <= 0 || k_r <= 0)
    throw std::invalid_argument("init_parameters: sizes must be positive");
  GnmParameters p;
  p.w_g0.resize(n, k);
  p.w_g1.resize(k, 1);
  p.w0.resize(n + 4, k_r);
  p.b0 = Eigen::VectorXd::Zero(k_r);
  p.w1.resize(k_r, 1);
  p.b1 = 0.0;
  std::mt19937_64 rng(seed);
  detail::fill_uniform(p.w_g0, rng);
  detail::fill_uniform(p.w_g1, rng);
  detail::fill_uniform(p.w0, rng);
  detail::fill_uniform(p.w1, rng);
  return p;
}

struct ForwardCache {
  Eigen::MatrixXd z1, h1; // n x k
  Eigen::VectorXd z2, h2; // n
  Eigen::VectorXd x;      // n + 4
  Eigen::VectorXd z0, hidden; // k_r
  double out = 0.0;
};

inline double forward(const GnmParameters &p, const CircuitGraph &graph,
                      const Eigen::Vector4d &xr_std, ForwardCache *cache = nullptr) {
  if (graph.n != p.n())
    throw std::invalid_argument("forward: graph size does not match the model");
  ForwardCache local;
  ForwardCache &c = cache ? *cache : local;
  c.z1 = graph.s * graph.x_g * p.w_g0;
  c.h1 = c.z1.cwiseMax(0.0);
  c.z2 = graph.s * c.h1 * p.w_g1;
  c.h2 = c.z2.cwiseMax(0.0);
  c.x.resize(graph.n + 4);
  c.x.head(graph.n) = c.h2;
  c.x.tail(4) = xr_std;
  c.z0 = p.w0.transpose() * c.x + p.b0;
  c.hidden = c.z0.cwiseMax(0.0);
  c.out = (c.hidden.transpose() * p.w1)(0) + p.b1;
  return c.out;
}

struct GnmGradients {
  Eigen::MatrixXd w_g0, w_g1, w0, w1;
  Eigen::VectorXd b0;
  double b1 = 0.0;
};

inline GnmGradients backward(const GnmParameters &p, const CircuitGraph &graph,
                             const ForwardCache &c, double dout) {
  GnmGradients g;
  g.w1 = dout * c.hidden;
  g.b1 = dout;
  Eigen::VectorXd dhidden = dout * p.w1.col(0);
  Eigen::VectorXd dz0 =
      dhidden.cwiseProduct((c.z0.array() > 0.0).cast<double>().matrix());
  g.w0 = c.x * dz0.transpose();
  g.b0 = dz0;
  Eigen::VectorXd dx = p.w0 * dz0;
  Eigen::VectorXd dh2 = dx.head(graph.n);
  Eigen::VectorXd dz2 = dh2.cwiseProduct((c.z2.array() > 0.0).cast<double>().matrix());
  Eigen::MatrixXd sh1 = graph.s * c.h1;
  g.w_g1 = sh1.transpose() * dz2;
  Eigen::MatrixXd dh1 = graph.s.transpose() * dz2 * p.w_g1.transpose();
  Eigen::MatrixXd dz1 =
      dh1.cwiseProduct((c.z1.array() > 0.0).cast<double>().matrix());
  Eigen::MatrixXd sxg = graph.s * graph.x_g;
  g.w_g0 = sxg.transpose() * dz1;
  return g;
}

// The median absolute gap between labels and the raw noisy energies,
// expressed in label standard deviations, sets the Huber knee; floored so a
// degenerate set cannot collapse the quadratic region.
inline double select_delta(const std::vector<TrainingSample> &raw, const Scaler &sc) {
  std::vector<double> dev;
  dev.reserve(raw.size());
  for (const auto &s : raw)
    dev.push_back(std::abs(s.label - s.features.n_c) / sc.label_std);
  return std::max(median(dev), 1e-3);
}

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  int k = 16;
  int k_r = 64;
  double delta = 0.0; // <= 0 selects from the data
  std::uint64_t seed = 42;
};

struct TrainedModel {
  GnmParameters params;
  Scaler scaler;
  TrainConfig config;
  double delta = 0.0;
  std::string label_kind;
  std::vector<double> loss_history; // mean loss per epoch
};

namespace detail {

struct AdamState {
  GnmGradients m, v;
  long t = 0;
};

inline void adam_tensor(Eigen::MatrixXd &p, const Eigen::MatrixXd &g, Eigen::MatrixXd &m,
                        Eigen::MatrixXd &v, double lr, long t) {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
  double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  p -= (lr * (m / c1).array() / ((v / c2).array().sqrt() + eps)).matrix();
}

inline void adam_step(GnmParameters &p, const GnmGradients &g, AdamState &st, double lr) {
  ++st.t;
  adam_tensor(p.w_g0, g.w_g0, st.m.w_g0, st.v.w_g0, lr, st.t);
  adam_tensor(p.w_g1, g.w_g1, st.m.w_g1, st.v.w_g1, lr, st.t);
  adam_tensor(p.w0, g.w0, st.m.w0, st.v.w0, lr, st.t);
  adam_tensor(p.w1, g.w1, st.m.w1, st.v.w1, lr, st.t);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Eigen::VectorXd mb = b1 * st.m.b0 + (1.0 - b1) * g.b0;
  Eigen::VectorXd vb = b2 * st.v.b0 + (1.0 - b2) * g.b0.cwiseProduct(g.b0);
  st.m.b0 = mb;
  st.v.b0 = vb;
  double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  p.b0 -= (lr * (mb / c1).array() / ((vb / c2).array().sqrt() + eps)).matrix();
  st.m.b1 = b1 * st.m.b1 + (1.0 - b1) * g.b1;
  st.v.b1 = b2 * st.v.b1 + (1.0 - b2) * g.b1 * g.b1;
  p.b1 -= lr * (st.m.b1 / c1) / (std::sqrt(st.v.b1 / c2) + eps);
}

inline GnmGradients zero_like(const GnmParameters &p) {
  GnmGradients g;
  g.w_g0 = Eigen::MatrixXd::Zero(p.w_g0.rows(), p.w_g0.cols());
  g.w_g1 = Eigen::MatrixXd::Zero(p.w_g1.rows(), p.w_g1.cols());
  g.w0 = Eigen::MatrixXd::Zero(p.w0.rows(), p.w0.cols());
  g.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  g.b0 = Eigen::VectorXd::Zero(p.b0.size());
  g.b1 = 0.0;
  return g;
}

} // namespace detail

// Per-sample Adam updates in the fixed enumeration order of the sample list.
// A non-finite loss aborts rather than producing a silently broken model.
inline TrainedModel train(const std::vector<TrainingSample> &samples, const TrainConfig &cfg) {
  if (samples.empty())
    throw std::invalid_argument("train: at least one sample is required");
  if (cfg.epochs <= 0 || cfg.learning_rate <= 0.0)
    throw std::invalid_argument("train: epochs and learning rate must be positive");
  const int n = samples.front().graph.n;
  for (const auto &s : samples)
    if (s.graph.n != n)
      throw std::invalid_argument("train: samples mix graph sizes");

  TrainedModel model;
  model.config = cfg;
  model.label_kind = samples.front().label_kind;
  auto [std_samples, scaler] = standardize(samples);
  model.scaler = scaler;
  model.delta = cfg.delta > 0.0 ? cfg.delta : select_delta(samples, scaler);
  model.params = init_parameters(n, cfg.k, cfg.k_r, cfg.seed);

  detail::AdamState adam;
  adam.m = detail::zero_like(model.params);
  adam.v = detail::zero_like(model.params);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto &s : std_samples) {
      ForwardCache cache;
      double out = forward(model.params, s.graph, s.features.vec(), &cache);
      double residual = out - s.label;
      double loss = huber_loss(residual, model.delta);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss is not finite at epoch " + std::to_string(epoch));
      loss_sum += loss;
      GnmGradients grads =
          backward(model.params, s.graph, cache, huber_grad(residual, model.delta));
      detail::adam_step(model.params, grads, adam, cfg.learning_rate);
    }
    model.loss_history.push_back(loss_sum / static_cast<double>(std_samples.size()));
  }
  return model;
}

inline double predict(const TrainedModel &model, const TrainingSample &sample) {
  Eigen::Vector4d z = model.scaler.transform(sample.features.vec());
  return model.scaler.inverse_label(forward(model.params, sample.graph, z));
}

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd &m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json &j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("model json: matrix must be a non-empty array");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols)
      throw std::invalid_argument("model json: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

} // namespace detail

inline nlohmann::json model_to_json(const TrainedModel &model) {
  nlohmann::json j;
  j["version"] = version_string;
  j["n"] = model.params.n();
  j["k"] = model.params.k();
  j["k_r"] = model.params.k_r();
  j["seed"] = model.config.seed;
  j["epochs"] = model.config.epochs;
  j["learning_rate"] = model.config.learning_rate;
  j["delta"] = model.delta;
  j["label_kind"] = model.label_kind;
  j["scaler"] = {{"mean", {model.scaler.mean[0], model.scaler.mean[1], model.scaler.mean[2],
                           model.scaler.mean[3]}},
                 {"std", {model.scaler.std[0], model.scaler.std[1], model.scaler.std[2],
                          model.scaler.std[3]}},
                 {"label_mean", model.scaler.label_mean},
                 {"label_std", model.scaler.label_std}};
  j["w_g0"] = detail::matrix_to_json(model.params.w_g0);
  j["w_g1"] = detail::matrix_to_json(model.params.w_g1);
  j["w0"] = detail::matrix_to_json(model.params.w0);
  j["b0"] = std::vector<double>(model.params.b0.data(),
                                model.params.b0.data() + model.params.b0.size());
  j["w1"] = detail::matrix_to_json(model.params.w1);
  j["b1"] = model.params.b1;
  j["loss_history"] = model.loss_history;
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json &j) {
  TrainedModel model;
  try {
    model.params.w_g0 = detail::matrix_from_json(j.at("w_g0"));
    model.params.w_g1 = detail::matrix_from_json(j.at("w_g1"));
    model.params.w0 = detail::matrix_from_json(j.at("w0"));
    model.params.w1 = detail::matrix_from_json(j.at("w1"));
    auto b0 = j.at("b0").get<std::vector<double>>();
    model.params.b0 = Eigen::Map<Eigen::VectorXd>(b0.data(), static_cast<Eigen::Index>(b0.size()));
    model.params.b1 = j.at("b1").get<double>();
    const auto &sc = j.at("scaler");
    auto mean = sc.at("mean").get<std::vector<double>>();
    auto sd = sc.at("std").get<std::vector<double>>();
    if (mean.size() != 4 || sd.size() != 4)
      throw std::invalid_argument("model json: scaler must have 4 feature entries");
    for (int i = 0; i < 4; ++i) {
      model.scaler.mean[i] = mean[static_cast<std::size_t>(i)];
      model.scaler.std[i] = sd[static_cast<std::size_t>(i)];
    }
    model.scaler.label_mean = sc.at("label_mean").get<double>();
    model.scaler.label_std = sc.at("label_std").get<double>();
    model.delta = j.at("delta").get<double>();
    model.label_kind = j.at("label_kind").get<std::string>();
    model.config.seed = j.at("seed").get<std::uint64_t>();
    model.config.epochs = j.at("epochs").get<int>();
    model.config.learning_rate = j.at("learning_rate").get<double>();
    model.config.k = model.params.k();
    model.config.k_r = model.params.k_r();
    model.loss_history = j.value("loss_history", std::vector<double>{});
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("model json: ") + e.what());
  }
  if (model.params.w_g1.rows() != model.params.k() ||
      model.params.w0.rows() != model.params.n() + 4 ||
      model.params.w1.rows() != model.params.k_r() || model.params.w1.cols() != 1 ||
      model.params.b0.size() != model.params.k_r())
    throw std::invalid_argument("model json: inconsistent tensor shapes");
  return model;
}

inline void save_model(const std::string &path, const TrainedModel &model) {
  std::ofstream out(path);
  if (!out)
    throw io_error("cannot open for writing: " + path);
  out << model_to_json(model).dump(2) << "\n";
  if (!out)
    throw io_error("write failed: " + path);
}

inline TrainedModel load_model(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw io_error("cannot parse model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

} // namespace gnm
