#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gnm/pauli.hpp"

namespace gnm {

// Diagonal expectation of H on one computational basis state; off-diagonal
// strings (anything with an X or Y) contribute nothing.
inline double basis_energy(const QubitHamiltonian &h, std::uint64_t state) {
  double e = 0.0;
  for (const auto &t : h.terms) {
    PauliMasks m = pauli_masks(t.pauli);
    if (m.flip_mask != 0)
      continue;
    e += t.coeff * ((__builtin_popcountll(state & m.phase_mask) & 1) ? -1.0 : 1.0);
  }
  return e;
}

struct FixtureReport {
  std::string name;
  bool ok = false;
  double hf_file = 0.0;
  double hf_recomputed = 0.0;
  std::optional<double> fci_file;
  std::optional<double> fci_recomputed;
  std::string message; // empty when ok
};

// Re-derive the embedded energies from the committed coefficients: the mean
// field energy from the HF occupation state and the exact one from a dense
// sector diagonalization. Any drift beyond 1e-8 rejects the fixture, which
// is how a corrupted coefficient surfaces.
inline FixtureReport validate_fixture(const QubitHamiltonian &h, const std::string &name) {
  FixtureReport rep;
  rep.name = name;
  std::ostringstream msg;
  try {
    h.validate();
  } catch (const std::exception &e) {
    rep.message = e.what();
    return rep;
  }
  const double tol = 1e-8;
  rep.hf_file = h.hf_energy;
  rep.hf_recomputed = basis_energy(h, h.hf_state());
  if (std::abs(rep.hf_file - rep.hf_recomputed) > tol) {
    msg << "hf_energy mismatch: file " << rep.hf_file << " recomputed " << rep.hf_recomputed;
    rep.message = msg.str();
    return rep;
  }
  if (h.fci_energy) {
    rep.fci_file = *h.fci_energy;
    rep.fci_recomputed = exact_ground_energy(h);
    if (std::abs(*rep.fci_file - *rep.fci_recomputed) > tol) {
      msg << "fci_energy mismatch: file " << *rep.fci_file << " recomputed "
          << *rep.fci_recomputed;
      rep.message = msg.str();
      return rep;
    }
    if (*rep.fci_file > rep.hf_file + 1e-10) {
      msg << "variational bound violated: fci " << *rep.fci_file << " above hf " << rep.hf_file;
      rep.message = msg.str();
      return rep;
    }
  }
  rep.ok = true;
  return rep;
}

inline std::vector<FixtureReport> validate_fixtures(const std::vector<std::string> &paths) {
  std::vector<FixtureReport> out;
  out.reserve(paths.size());
  for (const auto &path : paths) {
    try {
      out.push_back(validate_fixture(load_hamiltonian(path), path));
    } catch (const std::exception &e) {
      FixtureReport rep;
      rep.name = path;
      rep.message = e.what();
      out.push_back(rep);
    }
  }
  return out;
}

} // namespace gnm
