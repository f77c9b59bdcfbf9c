#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnm/ansatz.hpp"
#include "gnm/common.hpp"
#include "gnm/device.hpp"
#include "gnm/graph.hpp"
#include "gnm/model.hpp"
#include "gnm/sha1.hpp"
#include "gnm/srem.hpp"
#include "gnm/version.hpp"

namespace gnm {

struct SweepGridSpec {
  int points = 5;
  double p2_min = 1e-3;
  double p2_max = 1e-2;
  double p1_ratio = 0.1;
  std::vector<std::pair<double, double>> explicit_grid; // overrides the log grid when non-empty
};

struct RunManifest {
  std::string hamiltonian_path;
  std::string device_path;
  bool noise_from_device = false;
  double p1 = 0.0, p2 = 0.0;
  double epsilon = 1e-5;
  std::string label_kind = "srem";
  std::uint64_t seed = 42;
  std::string output_dir;
  int max_2p_snippets = -1;
  int max_3p_snippets = 16;
  int k = 16;
  int k_r = 64;
  double learning_rate = 1e-3;
  int epochs = 100;
  bool oracle = false;
  SweepGridSpec sweep;
  std::string raw_text; // manifest file bytes, hashed into every output

  void validate() const {
    if (hamiltonian_path.empty() || device_path.empty())
      throw std::invalid_argument("manifest: hamiltonian and device paths are required");
    if (label_kind != "srem" && label_kind != "ideal")
      throw std::invalid_argument("manifest: label_kind must be srem or ideal");
    if (label_kind == "ideal" && !oracle)
      throw std::invalid_argument("manifest: label_kind ideal requires oracle mode");
    if (epsilon <= 0.0)
      throw std::invalid_argument("manifest: epsilon must be positive");
    if (!noise_from_device && (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0))
      throw std::invalid_argument("manifest: noise probabilities must lie in [0,1]");
  }
};

namespace detail {

inline nlohmann::json parse_json_text(const std::string &text, const std::string &what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw io_error("cannot parse " + what + ": " + e.what());
  }
}

inline std::string resolve_path(const std::string &p, const std::filesystem::path &base) {
  std::filesystem::path pp(p);
  return pp.is_absolute() ? pp.lexically_normal().string()
                          : (base / pp).lexically_normal().string();
}

} // namespace detail

// Paths inside the manifest are resolved relative to the manifest file.
inline RunManifest manifest_from_json(const nlohmann::json &j, const std::filesystem::path &base) {
  RunManifest m;
  try {
    m.hamiltonian_path = detail::resolve_path(j.at("hamiltonian").get<std::string>(), base);
    m.device_path = detail::resolve_path(j.at("device").get<std::string>(), base);
    const auto &noise = j.at("noise");
    if (noise.is_string()) {
      if (noise.get<std::string>() != "device")
        throw std::invalid_argument("manifest: noise must be \"device\" or {p1, p2}");
      m.noise_from_device = true;
    } else {
      m.p1 = noise.at("p1").get<double>();
      m.p2 = noise.at("p2").get<double>();
    }
    m.epsilon = j.value("epsilon", m.epsilon);
    m.label_kind = j.value("label_kind", m.label_kind);
    m.seed = j.value("seed", m.seed);
    m.output_dir = detail::resolve_path(j.value("output_dir", std::string(".")), base);
    m.max_2p_snippets = j.value("max_2p_snippets", m.max_2p_snippets);
    m.max_3p_snippets = j.value("max_3p_snippets", m.max_3p_snippets);
    m.k = j.value("k", m.k);
    m.k_r = j.value("k_r", m.k_r);
    m.learning_rate = j.value("learning_rate", m.learning_rate);
    m.epochs = j.value("epochs", m.epochs);
    m.oracle = j.value("oracle", m.oracle);
    if (j.contains("sweep")) {
      const auto &s = j.at("sweep");
      if (s.contains("grid")) {
        for (const auto &pt : s.at("grid"))
          m.sweep.explicit_grid.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
      }
      m.sweep.points = s.value("points", m.sweep.points);
      m.sweep.p2_min = s.value("p2_min", m.sweep.p2_min);
      m.sweep.p2_max = s.value("p2_max", m.sweep.p2_max);
      m.sweep.p1_ratio = s.value("p1_ratio", m.sweep.p1_ratio);
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("manifest json: ") + e.what());
  }
  return m;
}

inline RunManifest load_manifest(const std::string &path) {
  std::string text = read_file(path);
  nlohmann::json j = detail::parse_json_text(text, "manifest file " + path);
  RunManifest m = manifest_from_json(j, std::filesystem::path(path).parent_path());
  m.raw_text = text;
  return m;
}

inline NoiseSpec resolve_noise(const RunManifest &m, const DeviceProfile &device) {
  if (!m.noise_from_device)
    return NoiseSpec::uniform(device.n_qubits, m.p1, m.p2);
  NoiseSpec ns;
  ns.p1 = device.s_err;
  for (const auto &[edge, err] : device.t_err) {
    ns.p2[{edge.first, edge.second}] = err;
    ns.p2[{edge.second, edge.first}] = err;
  }
  return ns;
}

namespace detail {

inline std::string csv_quote(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvFile {
public:
  explicit CsvFile(const std::vector<std::string> &columns) : n_cols_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      body_ += (i ? "," : "") + columns[i];
    body_ += '\n';
  }

  void add_row(const std::vector<std::string> &fields) {
    if (fields.size() != n_cols_)
      throw std::logic_error("csv: field count mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i)
      body_ += (i ? "," : "") + csv_quote(fields[i]);
    body_ += '\n';
  }

  std::string finish(std::uint64_t seed, const std::string &inputs_hash) const {
    return body_ + "# seed=" + std::to_string(seed) + " inputs=" + inputs_hash + " version=" +
           version_string + "\n";
  }

private:
  std::string body_;
  std::size_t n_cols_ = 0;
};

inline void write_text_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw io_error("cannot open for writing: " + path.string());
  out << text;
  if (!out)
    throw io_error("write failed: " + path.string());
}

inline void ensure_output_dir(const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw io_error("cannot create output directory " + dir + ": " + ec.message());
}

struct LoadedInputs {
  QubitHamiltonian h;
  DeviceProfile device;
  NoiseSpec noise;
  std::string hash_payload; // manifest + input file bytes
};

inline LoadedInputs load_inputs(const RunManifest &m) {
  LoadedInputs in;
  std::string h_text = read_file(m.hamiltonian_path);
  std::string d_text = read_file(m.device_path);
  in.h = hamiltonian_from_json(parse_json_text(h_text, "hamiltonian file " + m.hamiltonian_path));
  in.device = device_from_json(parse_json_text(d_text, "device file " + m.device_path));
  if (in.h.n_qubits > in.device.n_qubits)
    throw std::invalid_argument("pipeline: hamiltonian needs more qubits than the device has");
  in.noise = resolve_noise(m, in.device);
  in.hash_payload = m.raw_text + h_text + d_text;
  return in;
}

} // namespace detail

struct SelectOutcome {
  OperatorPool pool;
  std::vector<ScreeningRecord> records;
  AnsatzSpec ansatz;
  std::size_t n_failed = 0;
};

inline SelectOutcome run_select(const QubitHamiltonian &h, const DeviceProfile &device,
                                const NoiseSpec &noise, double epsilon) {
  SelectOutcome out;
  out.pool = build_pool(h);
  out.records = screen_doubles(out.pool, h, device, noise, epsilon);
  out.ansatz = assemble(out.records, out.pool, h, epsilon);
  for (const auto &rec : out.records)
    if (!rec.converged)
      ++out.n_failed;
  return out;
}

struct LabelsOutcome {
  std::vector<SremRecord> records;
  std::vector<TrainingSample> samples; // converged records only
  std::size_t n_failed = 0;
};

inline LabelsOutcome run_labels(const AnsatzSpec &ansatz, const QubitHamiltonian &h,
                                const DeviceProfile &device, const NoiseSpec &noise,
                                const LabelConfig &cfg, const std::string &label_kind) {
  LabelsOutcome out;
  out.records = generate_labels(ansatz, h, device, noise, cfg);
  for (const auto &rec : out.records) {
    if (!rec.converged) {
      ++out.n_failed;
      std::cerr << "labels: snippet [";
      for (std::size_t i = 0; i < rec.op_indices.size(); ++i)
        std::cerr << (i ? "," : "") << rec.op_indices[i];
      std::cerr << "] did not converge; excluded from training data\n";
      continue;
    }
    TranspiledCircuit tc = transpile(ansatz.subsequence_circuit(rec.op_indices), device);
    TrainingSample s;
    s.graph = build_graph(tc, device);
    s.features = build_features(tc, rec.e_noisy);
    s.label = label_kind == "ideal" ? rec.e_ideal.value() : rec.e_srem;
    s.label_kind = label_kind;
    out.samples.push_back(std::move(s));
  }
  return out;
}

struct MitigationOutcome {
  double e_noisy = 0.0;
  double e_pred = 0.0;
  std::optional<double> e_ideal;
  VqeResult vqe;
  TrainingSample sample; // label left at zero; carries the full-circuit graph
};

inline MitigationOutcome run_mitigation(const AnsatzSpec &ansatz, const TrainedModel &model,
                                        const QubitHamiltonian &h, const DeviceProfile &device,
                                        const NoiseSpec &noise, bool with_ideal) {
  MitigationOutcome out;
  TranspiledCircuit tc = transpile(ansatz.full_circuit(), device);
  CircuitEvaluator eval(tc.circuit, h, noise, h.hf_state());
  const int n = eval.n_params();
  out.vqe = minimize(eval, all_free(n, std::vector<double>(static_cast<std::size_t>(n), 0.0)));
  out.e_noisy = out.vqe.energy;
  out.sample.graph = build_graph(tc, device);
  out.sample.features = build_features(tc, out.e_noisy);
  out.sample.label_kind = model.label_kind;
  out.e_pred = predict(model, out.sample);
  if (with_ideal) {
    auto obj = [&](const std::vector<double> &x) { return eval.ideal_energy(x); };
    NmResult nm = nelder_mead(obj, std::vector<double>(static_cast<std::size_t>(n), 0.0),
                              n > 0 ? 200 * n : 0, 1e-6, 1e-9, 0.05);
    out.e_ideal = nm.f;
  }
  return out;
}

inline int cmd_select(const RunManifest &m) {
  detail::LoadedInputs in = detail::load_inputs(m);
  detail::ensure_output_dir(m.output_dir);
  SelectOutcome sel = run_select(in.h, in.device, in.noise, m.epsilon);
  const std::string hash = git_blob_sha1(in.hash_payload);
  const std::filesystem::path dir(m.output_dir);

  detail::write_text_file(dir / "ansatz.json", ansatz_to_json(sel.ansatz).dump(2) + "\n");

  detail::CsvFile csv({"op", "E_I", "E_I0", "stabilization", "selected"});
  for (const auto &rec : sel.records)
    csv.add_row({rec.op.label(), format_double(rec.e_opt), format_double(rec.e_ref),
                 format_double(rec.stabilization()), rec.selected ? "1" : "0"});
  detail::write_text_file(dir / "screening.csv", csv.finish(m.seed, hash));

  if (2 * sel.n_failed > sel.records.size()) {
    std::cerr << "select: most screening optimizations failed to converge\n";
    return 3;
  }
  if (sel.ansatz.n_doubles == 0) {
    std::cerr << "select: no operator passed the screening threshold epsilon="
              << format_double(m.epsilon) << "\n";
    return 2;
  }
  return 0;
}

namespace detail {

inline std::string thetas_json(const SremRecord &rec) {
  nlohmann::json j;
  j["noisy"] = rec.theta_noisy;
  j["prime"] = rec.theta_prime;
  j["partial"] = rec.theta_partial;
  return j.dump();
}

inline std::string indices_json(const std::vector<int> &idx) {
  return nlohmann::json(idx).dump();
}

} // namespace detail

inline int cmd_labels(const RunManifest &m) {
  detail::LoadedInputs in = detail::load_inputs(m);
  const std::filesystem::path dir(m.output_dir);
  std::string ansatz_text = read_file((dir / "ansatz.json").string());
  AnsatzSpec ansatz = ansatz_from_json(
      detail::parse_json_text(ansatz_text, "ansatz file " + (dir / "ansatz.json").string()));
  if (ansatz.ops.empty()) {
    std::cerr << "labels: ansatz is empty, nothing to label\n";
    return 2;
  }

  LabelConfig cfg;
  cfg.max_2p = m.max_2p_snippets;
  cfg.max_3p = m.max_3p_snippets;
  cfg.seed = m.seed;
  cfg.with_ideal = m.oracle || m.label_kind == "ideal";
  LabelsOutcome out = run_labels(ansatz, in.h, in.device, in.noise, cfg, m.label_kind);

  const std::string hash = git_blob_sha1(in.hash_payload + ansatz_text);
  detail::ensure_output_dir(m.output_dir);

  std::vector<std::string> cols{"op_indices", "n_params", "E_noisy", "E_srem"};
  if (cfg.with_ideal)
    cols.push_back("E_ideal");
  for (const char *c : {"e_ref0", "delta_ref", "e_partial", "e_prime", "e_prev_em", "converged",
                        "thetas"})
    cols.push_back(c);
  detail::CsvFile csv(cols);
  for (const auto &rec : out.records) {
    std::vector<std::string> row{detail::indices_json(rec.op_indices),
                                 std::to_string(rec.n_params), format_double(rec.e_noisy),
                                 format_double(rec.e_srem)};
    if (cfg.with_ideal)
      row.push_back(rec.e_ideal ? format_double(*rec.e_ideal) : "");
    row.push_back(format_double(rec.e_ref0));
    row.push_back(format_double(rec.delta_ref));
    row.push_back(format_double(rec.e_partial));
    row.push_back(format_double(rec.e_prime));
    row.push_back(format_double(rec.e_prev_em));
    row.push_back(rec.converged ? "1" : "0");
    row.push_back(detail::thetas_json(rec));
    csv.add_row(row);
  }
  detail::write_text_file(dir / "labels.csv", csv.finish(m.seed, hash));
  write_samples((dir / "training.jsonl").string(), out.samples);

  if (2 * out.n_failed > out.records.size()) {
    std::cerr << "labels: most snippet optimizations failed to converge\n";
    return 3;
  }
  return 0;
}

inline int cmd_train(const RunManifest &m) {
  const std::filesystem::path dir(m.output_dir);
  const std::string samples_path = (dir / "training.jsonl").string();
  std::string samples_text = read_file(samples_path);
  std::vector<TrainingSample> samples = load_samples(samples_path);

  TrainConfig cfg;
  cfg.epochs = m.epochs;
  cfg.learning_rate = m.learning_rate;
  cfg.k = m.k;
  cfg.k_r = m.k_r;
  cfg.seed = m.seed;
  TrainedModel model = train(samples, cfg);

  const std::string hash = git_blob_sha1(m.raw_text + samples_text);
  detail::ensure_output_dir(m.output_dir);
  detail::write_text_file(dir / "model.json", model_to_json(model).dump(2) + "\n");

  detail::CsvFile csv({"epoch", "mean_huber_loss"});
  for (std::size_t e = 0; e < model.loss_history.size(); ++e)
    csv.add_row({std::to_string(e), format_double(model.loss_history[e])});
  detail::write_text_file(dir / "loss.csv", csv.finish(m.seed, hash));
  return 0;
}

inline int cmd_mitigate(const RunManifest &m) {
  detail::LoadedInputs in = detail::load_inputs(m);
  const std::filesystem::path dir(m.output_dir);
  std::string ansatz_text = read_file((dir / "ansatz.json").string());
  AnsatzSpec ansatz = ansatz_from_json(
      detail::parse_json_text(ansatz_text, "ansatz file " + (dir / "ansatz.json").string()));
  if (ansatz.ops.empty()) {
    std::cerr << "mitigate: ansatz is empty, nothing to mitigate\n";
    return 2;
  }
  std::string model_text = read_file((dir / "model.json").string());
  TrainedModel model = model_from_json(
      detail::parse_json_text(model_text, "model file " + (dir / "model.json").string()));

  MitigationOutcome out = run_mitigation(ansatz, model, in.h, in.device, in.noise, m.oracle);

  const std::string hash = git_blob_sha1(in.hash_payload + ansatz_text + model_text);
  std::vector<std::string> cols{"E_noisy", "E_pred", "delta_pred_noisy"};
  if (m.oracle)
    for (const char *c : {"E_ideal", "delta_noisy_ideal", "delta_pred_ideal"})
      cols.push_back(c);
  detail::CsvFile csv(cols);
  std::vector<std::string> row{format_double(out.e_noisy), format_double(out.e_pred),
                               format_double(out.e_pred - out.e_noisy)};
  if (m.oracle) {
    row.push_back(format_double(*out.e_ideal));
    row.push_back(format_double(out.e_noisy - *out.e_ideal));
    row.push_back(format_double(out.e_pred - *out.e_ideal));
  }
  csv.add_row(row);
  detail::ensure_output_dir(m.output_dir);
  detail::write_text_file(dir / "result.csv", csv.finish(m.seed, hash));
  return 0;
}

inline std::vector<std::pair<double, double>> sweep_grid(const SweepGridSpec &spec) {
  if (!spec.explicit_grid.empty())
    return spec.explicit_grid;
  if (spec.points < 1 || spec.p2_min <= 0.0 || spec.p2_max < spec.p2_min)
    throw std::invalid_argument("sweep: bad grid specification");
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i < spec.points; ++i) {
    double t = spec.points == 1
                   ? 0.0
                   : static_cast<double>(i) / static_cast<double>(spec.points - 1);
    double p2 = std::exp(std::log(spec.p2_min) + t * (std::log(spec.p2_max) - std::log(spec.p2_min)));
    grid.emplace_back(spec.p1_ratio * p2, p2);
  }
  return grid;
}

// One full pipeline (screen, label, train, mitigate) per grid point at fixed
// geometry. The ideal full-circuit energy is computed per point because the
// screened ansatz can change with the noise level.
inline int cmd_sweep_noise(const RunManifest &m) {
  detail::LoadedInputs in = detail::load_inputs(m);
  std::vector<std::pair<double, double>> grid = sweep_grid(m.sweep);

  detail::CsvFile csv({"p1", "p2", "E_noisy", "E_pred", "E_ideal"});
  int worst = 0;
  for (const auto &[p1, p2] : grid) {
    NoiseSpec noise = NoiseSpec::uniform(in.device.n_qubits, p1, p2);
    SelectOutcome sel = run_select(in.h, in.device, noise, m.epsilon);
    if (sel.ansatz.ops.empty()) {
      std::cerr << "sweep: empty selection at p1=" << format_double(p1)
                << " p2=" << format_double(p2) << "\n";
      worst = std::max(worst, 2);
      continue;
    }
    LabelConfig cfg;
    cfg.max_2p = m.max_2p_snippets;
    cfg.max_3p = m.max_3p_snippets;
    cfg.seed = m.seed;
    cfg.with_ideal = m.label_kind == "ideal";
    LabelsOutcome labels = run_labels(sel.ansatz, in.h, in.device, noise, cfg, m.label_kind);
    if (2 * labels.n_failed > labels.records.size()) {
      std::cerr << "sweep: most snippet optimizations failed at p1=" << format_double(p1)
                << " p2=" << format_double(p2) << "\n";
      worst = std::max(worst, 3);
      continue;
    }
    TrainConfig tc;
    tc.epochs = m.epochs;
    tc.learning_rate = m.learning_rate;
    tc.k = m.k;
    tc.k_r = m.k_r;
    tc.seed = m.seed;
    TrainedModel model = train(labels.samples, tc);
    MitigationOutcome mit = run_mitigation(sel.ansatz, model, in.h, in.device, noise, true);
    csv.add_row({format_double(p1), format_double(p2), format_double(mit.e_noisy),
                 format_double(mit.e_pred), format_double(*mit.e_ideal)});
  }
  const std::string hash = git_blob_sha1(in.hash_payload);
  detail::ensure_output_dir(m.output_dir);
  detail::write_text_file(std::filesystem::path(m.output_dir) / "sweep.csv",
                          csv.finish(m.seed, hash));
  return worst;
}

} // namespace gnm
