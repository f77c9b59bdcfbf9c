#pragma once

// Shared helpers for the test suite: dense matrix oracles built
// independently of the library's simulation paths, tiny device builders,
// and filesystem scratch space for CLI round-trips.

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnm/device.hpp"
#include "gnm/pauli.hpp"

namespace testutil {

inline std::string fixture_path(const std::string &name) {
  return std::string(GNM_FIXTURE_DIR) + "/" + name;
}

// Dense operator acting as `m2` on qubit q (bit q of the basis index) and
// identity elsewhere.
inline Eigen::MatrixXcd dense_1q(int n_qubits, int q, const Eigen::Matrix2cd &m2) {
  const long dim = 1L << n_qubits;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  const long bit = 1L << q;
  for (long s = 0; s < dim; ++s) {
    const long b = (s & bit) ? 1 : 0;
    const long base = s & ~bit;
    for (long bp = 0; bp < 2; ++bp)
      out(base | (bp << q), s) = m2(bp, b);
  }
  return out;
}

inline Eigen::Matrix2cd sigma(char p) {
  Eigen::Matrix2cd m;
  using namespace std::complex_literals;
  switch (p) {
  case 'I':
    m << 1, 0, 0, 1;
    break;
  case 'X':
    m << 0, 1, 1, 0;
    break;
  case 'Y':
    m << 0, -1i, 1i, 0;
    break;
  default:
    m << 1, 0, 0, -1;
    break;
  }
  return m;
}

inline Eigen::MatrixXcd dense_pauli(int n_qubits, const std::string &pauli) {
  const long dim = 1L << n_qubits;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(dim, dim);
  for (int q = 0; q < n_qubits; ++q)
    if (pauli[static_cast<std::size_t>(q)] != 'I')
      out = dense_1q(n_qubits, q, sigma(pauli[static_cast<std::size_t>(q)])) * out;
  return out;
}

// Fermionic annihilator under the library's Jordan-Wigner convention:
// a_m = Z_0..Z_{m-1} (X_m + i Y_m)/2, occupied = |1>.
inline Eigen::MatrixXcd dense_annihilator(int n_qubits, int m) {
  Eigen::Matrix2cd lower;
  lower << 0, 1, 0, 0; // |0><1|
  Eigen::MatrixXcd out = dense_1q(n_qubits, m, lower);
  Eigen::Matrix2cd z = sigma('Z');
  for (int q = 0; q < m; ++q)
    out = dense_1q(n_qubits, q, z) * out;
  return out;
}

inline Eigen::MatrixXcd dense_hamiltonian(const gnm::QubitHamiltonian &h) {
  const long dim = 1L << h.n_qubits;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto &t : h.terms)
    out += t.coeff * dense_pauli(h.n_qubits, t.pauli);
  return out;
}

// Path-coupled device with uniform error annotations.
inline gnm::DeviceProfile line_device(int n, double s_err = 1e-4, double t_err = 1e-3) {
  gnm::DeviceProfile d;
  d.name = "line" + std::to_string(n);
  d.n_qubits = n;
  d.s_err.assign(static_cast<std::size_t>(n), s_err);
  for (int i = 0; i + 1 < n; ++i) {
    d.coupling.emplace_back(i, i + 1);
    d.t_err[{i, i + 1}] = t_err;
  }
  return d;
}

// Fresh scratch directory under the test working directory.
class ScratchDir {
public:
  explicit ScratchDir(const std::string &tag) {
    path_ = std::filesystem::current_path() / ("scratch_" + tag);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path &path() const { return path_; }
  std::string file(const std::string &name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Run the CLI binary with the given arguments; stdout/stderr are captured
// into files inside `dir`.
inline CliResult run_cli(const ScratchDir &dir, const std::string &args,
                         const std::string &env_prefix = "") {
  const std::string out_path = dir.file("cli_stdout.txt");
  const std::string err_path = dir.file("cli_stderr.txt");
  std::string cmd = env_prefix + std::string(GNM_CLI_PATH) + " " + args + " > " + out_path +
                    " 2> " + err_path;
  int rc = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  std::ifstream out(out_path), err(err_path);
  res.out.assign(std::istreambuf_iterator<char>(out), std::istreambuf_iterator<char>());
  res.err.assign(std::istreambuf_iterator<char>(err), std::istreambuf_iterator<char>());
  return res;
}

inline std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace testutil
