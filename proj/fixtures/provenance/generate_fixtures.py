#!/usr/bin/env python3
"""Generate the committed fixture data: qubit Hamiltonians for linear
hydrogen chains in a minimal basis, plus synthetic device error profiles.

Everything is computed from closed-form s-orbital Gaussian integrals, a
small RHF solver, and an explicit Jordan-Wigner expansion, so the output
depends only on numpy/scipy and this file.  The JSON files store the
reference energies recomputed *from the emitted Pauli terms*, which makes
them self-consistent to machine precision even after coefficient pruning.

Usage: python3 fixtures/provenance/generate_fixtures.py --out fixtures
"""

import argparse
import itertools
import json
import math
import os

import numpy as np
from scipy.linalg import eigh
from scipy.special import erf

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# STO-3G hydrogen 1s (exponents already scaled by zeta = 1.24).
STO3G_H_EXP = np.array([3.42525091, 0.62391373, 0.16885540])
STO3G_H_COEF = np.array([0.15432897, 0.53532814, 0.44463454])


def boys_f0(t):
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * erf(math.sqrt(t))


class Basis:
    """Contracted s-type Gaussians, one per atom."""

    def __init__(self, centers):
        self.centers = [np.asarray(c, dtype=float) for c in centers]
        norms = (2.0 * STO3G_H_EXP / math.pi) ** 0.75
        self.coef = STO3G_H_COEF * norms
        # renormalize the contraction so <phi|phi> = 1 exactly
        s = 0.0
        for a, ca in zip(STO3G_H_EXP, self.coef):
            for b, cb in zip(STO3G_H_EXP, self.coef):
                s += ca * cb * (math.pi / (a + b)) ** 1.5
        self.coef /= math.sqrt(s)

    def n(self):
        return len(self.centers)


def overlap_kinetic(basis):
    n = basis.n()
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            rab2 = float(np.dot(basis.centers[i] - basis.centers[j],
                                basis.centers[i] - basis.centers[j]))
            for a, ca in zip(STO3G_H_EXP, basis.coef):
                for b, cb in zip(STO3G_H_EXP, basis.coef):
                    p = a + b
                    mu = a * b / p
                    s = (math.pi / p) ** 1.5 * math.exp(-mu * rab2)
                    S[i, j] += ca * cb * s
                    T[i, j] += ca * cb * mu * (3.0 - 2.0 * mu * rab2) * s
    return S, T


def nuclear_attraction(basis, charges):
    n = basis.n()
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            A, B = basis.centers[i], basis.centers[j]
            rab2 = float(np.dot(A - B, A - B))
            for a, ca in zip(STO3G_H_EXP, basis.coef):
                for b, cb in zip(STO3G_H_EXP, basis.coef):
                    p = a + b
                    mu = a * b / p
                    P = (a * A + b * B) / p
                    pre = ca * cb * (2.0 * math.pi / p) * math.exp(-mu * rab2)
                    for C, z in charges:
                        rpc2 = float(np.dot(P - C, P - C))
                        V[i, j] -= z * pre * boys_f0(p * rpc2)
    return V


def electron_repulsion(basis):
    n = basis.n()
    eri = np.zeros((n, n, n, n))
    for i, j, k, l in itertools.product(range(n), repeat=4):
        A, B, C, D = (basis.centers[x] for x in (i, j, k, l))
        rab2 = float(np.dot(A - B, A - B))
        rcd2 = float(np.dot(C - D, C - D))
        val = 0.0
        for a, ca in zip(STO3G_H_EXP, basis.coef):
            for b, cb in zip(STO3G_H_EXP, basis.coef):
                p = a + b
                Pc = (a * A + b * B) / p
                eab = math.exp(-a * b / p * rab2)
                for c, cc in zip(STO3G_H_EXP, basis.coef):
                    for d, cd in zip(STO3G_H_EXP, basis.coef):
                        q = c + d
                        Qc = (c * C + d * D) / q
                        ecd = math.exp(-c * d / q * rcd2)
                        omega = p * q / (p + q)
                        rpq2 = float(np.dot(Pc - Qc, Pc - Qc))
                        val += (ca * cb * cc * cd
                                * 2.0 * math.pi ** 2.5
                                / (p * q * math.sqrt(p + q))
                                * eab * ecd * boys_f0(omega * rpq2))
        eri[i, j, k, l] = val
    return eri


def rhf(S, Hcore, eri, n_elec, e_nuc):
    """Closed-shell SCF with DIIS. Returns (E_total, C, orbital_energies)."""
    n = S.shape[0]
    n_occ = n_elec // 2
    evals, evecs = np.linalg.eigh(S)
    X = evecs @ np.diag(evals ** -0.5) @ evecs.T

    def density(C):
        Cocc = C[:, :n_occ]
        return 2.0 * Cocc @ Cocc.T

    def fock(D):
        J = np.einsum("pqrs,rs->pq", eri, D)
        K = np.einsum("prqs,rs->pq", eri, D)
        return Hcore + J - 0.5 * K

    # core guess
    e, Cp = np.linalg.eigh(X.T @ Hcore @ X)
    C = X @ Cp
    D = density(C)
    fock_hist, err_hist = [], []
    E_old = 0.0
    for it in range(200):
        F = fock(D)
        err = F @ D @ S - S @ D @ F
        fock_hist.append(F)
        err_hist.append(err)
        if len(fock_hist) > 8:
            fock_hist.pop(0)
            err_hist.pop(0)
        m = len(fock_hist)
        if m > 1:
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for a in range(m):
                for b in range(m):
                    B[a, b] = np.sum(err_hist[a] * err_hist[b])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(B, rhs)[:m]
                F = sum(wi * Fi for wi, Fi in zip(w, fock_hist))
            except np.linalg.LinAlgError:
                pass
        e, Cp = np.linalg.eigh(X.T @ F @ X)
        C = X @ Cp
        D = density(C)
        E = 0.5 * np.sum(D * (Hcore + fock(D))) + e_nuc
        if abs(E - E_old) < 1e-12 and np.max(np.abs(err)) < 1e-9:
            return E, C, e
        E_old = E
    raise RuntimeError("SCF failed to converge")


def symmetry_adapted_mos(S, F, n_sites):
    """Re-diagonalize a converged Fock matrix in the inversion-symmetry
    basis of a linear chain, so every MO is exactly parity-pure.
    Returns (C, orbital_energies, parities) sorted by energy."""
    n = n_sites
    combos = []  # (vector, parity)
    for i in range(n // 2):
        j = n - 1 - i
        g = np.zeros(n)
        g[i] = g[j] = 1.0
        u = np.zeros(n)
        u[i], u[j] = 1.0, -1.0
        combos.append((g, 0))
        combos.append((u, 1))
    if n % 2 == 1:
        c = np.zeros(n)
        c[n // 2] = 1.0
        combos.append((c, 0))
    mos = []
    for parity in (0, 1):
        block = np.array([v for v, p in combos if p == parity]).T
        if block.size == 0:
            continue
        Fb = block.T @ F @ block
        Sb = block.T @ S @ block
        e, v = eigh(Fb, Sb)
        for k in range(len(e)):
            mos.append((e[k], parity, block @ v[:, k]))
    mos.sort(key=lambda t: (t[0], t[1]))
    C = np.array([m[2] for m in mos]).T
    energies = np.array([m[0] for m in mos])
    parities = [m[1] for m in mos]
    return C, energies, parities


# ---------------------------------------------------------------------------
# Jordan-Wigner expansion.  Conventions: qubit m = spin orbital m, occupied
# is |1>, a_m = Z_0..Z_{m-1} (X_m + i Y_m)/2, a+_m the conjugate.

PAULI_MUL = {}
for _a in "IXYZ":
    for _b in "IXYZ":
        if _a == "I":
            PAULI_MUL[(_a, _b)] = (1.0, _b)
        elif _b == "I":
            PAULI_MUL[(_a, _b)] = (1.0, _a)
        elif _a == _b:
            PAULI_MUL[(_a, _b)] = (1.0, "I")
        else:
            third = ({"X", "Y", "Z"} - {_a, _b}).pop()
            cyclic = (_a, _b) in (("X", "Y"), ("Y", "Z"), ("Z", "X"))
            PAULI_MUL[(_a, _b)] = (1j if cyclic else -1j, third)


def ladder(m, dagger, n_qubits):
    base = ["Z"] * m + ["I"] * (n_qubits - m)
    x = base.copy()
    x[m] = "X"
    y = base.copy()
    y[m] = "Y"
    return [(0.5, "".join(x)), ((-0.5j if dagger else 0.5j), "".join(y))]


def accumulate(acc, coeff, factors, n_qubits):
    partial = [(coeff, "I" * n_qubits)]
    for factor in factors:
        nxt = []
        for cl, pl in partial:
            for cr, pr in factor:
                c = cl * cr
                out = []
                for a, b in zip(pl, pr):
                    ph, ch = PAULI_MUL[(a, b)]
                    c *= ph
                    out.append(ch)
                nxt.append((c, "".join(out)))
        partial = nxt
    for c, p in partial:
        acc[p] = acc.get(p, 0.0) + c


def jordan_wigner(h_mo, eri_mo, e_nuc):
    n_spatial = h_mo.shape[0]
    nq = 2 * n_spatial
    acc = {"I" * nq: complex(e_nuc)}
    for p in range(n_spatial):
        for q in range(n_spatial):
            if abs(h_mo[p, q]) < 1e-14:
                continue
            for s in range(2):
                accumulate(acc, h_mo[p, q],
                           [ladder(2 * p + s, True, nq),
                            ladder(2 * q + s, False, nq)], nq)
    for p, q, r, s in itertools.product(range(n_spatial), repeat=4):
        v = eri_mo[p, q, r, s]
        if abs(v) < 1e-14:
            continue
        for sig in range(2):
            for tau in range(2):
                accumulate(acc, 0.5 * v,
                           [ladder(2 * p + sig, True, nq),
                            ladder(2 * r + tau, True, nq),
                            ladder(2 * s + tau, False, nq),
                            ladder(2 * q + sig, False, nq)], nq)
    terms = {}
    for pauli, c in acc.items():
        if abs(c) < 1e-13:
            continue
        if abs(c.imag) > 1e-10:
            raise RuntimeError(f"non-Hermitian residue on {pauli}: {c}")
        terms[pauli] = c.real
    return terms


def hf_expectation(terms, n_qubits, n_elec):
    """<HF|H|HF> for the computational state with the lowest n_elec bits set."""
    total = 0.0
    for pauli, c in terms.items():
        if any(ch in "XY" for ch in pauli):
            continue
        sign = 1.0
        for q, ch in enumerate(pauli):
            if ch == "Z" and q < n_elec:
                sign = -sign
        total += c * sign
    return total


def sector_ground_energy(terms, n_qubits, n_elec):
    """Dense ground energy of the Pauli Hamiltonian restricted to the
    n_elec-particle sector (bit q of the basis index = occupation of qubit q)."""
    states = [s for s in range(1 << n_qubits) if bin(s).count("1") == n_elec]
    idx = {s: k for k, s in enumerate(states)}
    H = np.zeros((len(states), len(states)), dtype=complex)
    for pauli, c in terms.items():
        flip = 0
        for q, ch in enumerate(pauli):
            if ch in "XY":
                flip |= 1 << q
        for s in states:
            t = s ^ flip
            if t not in idx:
                continue
            phase = 1.0 + 0.0j
            for q, ch in enumerate(pauli):
                bit = (s >> q) & 1
                if ch == "Y":
                    phase *= 1j * (-1.0 if bit else 1.0)
                elif ch == "Z":
                    phase *= -1.0 if bit else 1.0
            H[idx[t], idx[s]] += c * phase
    if np.max(np.abs(H - H.conj().T)) > 1e-10:
        raise RuntimeError("sector Hamiltonian is not Hermitian")
    return float(np.linalg.eigvalsh(H)[0])


def build_molecule(name, spacings_angstrom, n_elec, charge_note=""):
    """Linear chain of hydrogens along z with the given inter-atomic gaps."""
    zs = [0.0]
    for d in spacings_angstrom:
        zs.append(zs[-1] + d)
    centers = [np.array([0.0, 0.0, z * ANGSTROM_TO_BOHR]) for z in zs]
    charges = [(c, 1.0) for c in centers]
    e_nuc = 0.0
    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            e_nuc += 1.0 / float(np.linalg.norm(centers[a] - centers[b]))

    basis = Basis(centers)
    S, T = overlap_kinetic(basis)
    V = nuclear_attraction(basis, charges)
    eri = electron_repulsion(basis)
    Hcore = T + V

    E_scf, C_scf, _ = rhf(S, Hcore, eri, n_elec, e_nuc)
    D = 2.0 * C_scf[:, : n_elec // 2] @ C_scf[:, : n_elec // 2].T
    J = np.einsum("pqrs,rs->pq", eri, D)
    K = np.einsum("prqs,rs->pq", eri, D)
    F = Hcore + J - 0.5 * K
    C, mo_e, parities = symmetry_adapted_mos(S, F, basis.n())

    # the parity-pure occupied space must reproduce the SCF energy
    Dsym = 2.0 * C[:, : n_elec // 2] @ C[:, : n_elec // 2].T
    Jsym = np.einsum("pqrs,rs->pq", eri, Dsym)
    Ksym = np.einsum("prqs,rs->pq", eri, Dsym)
    E_sym = 0.5 * np.sum(Dsym * (2.0 * Hcore + Jsym - 0.5 * Ksym)) + e_nuc
    if abs(E_sym - E_scf) > 1e-8:
        raise RuntimeError(f"{name}: symmetry-adapted MOs changed the SCF energy")

    h_mo = C.T @ Hcore @ C
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, eri, optimize=True)

    terms = jordan_wigner(h_mo, eri_mo, e_nuc)
    nq = 2 * basis.n()
    hf_e = hf_expectation(terms, nq, n_elec)
    if abs(hf_e - E_scf) > 1e-8:
        raise RuntimeError(f"{name}: <HF|H|HF>={hf_e} vs SCF {E_scf}")
    fci_e = sector_ground_energy(terms, nq, n_elec)
    if fci_e > hf_e + 1e-12:
        raise RuntimeError(f"{name}: FCI above HF")

    irreps = []
    for p in range(basis.n()):
        irreps.extend([parities[p], parities[p]])

    geom = "; ".join(f"H 0 0 {z:.4f}" for z in zs)
    if charge_note:
        geom += f" ({charge_note})"
    doc = {
        "n_qubits": nq,
        "n_electrons": n_elec,
        "hf_energy": hf_e,
        "fci_energy": fci_e,
        "orbital_irreps": irreps,
        "irrep_product": "xor",
        "terms": [{"coeff": terms[p], "pauli": p} for p in sorted(terms)],
        "meta": {"molecule": name, "geometry": geom, "basis": "sto-3g"},
    }
    print(f"{name:14s} q={nq:2d} e={n_elec} terms={len(terms):4d} "
          f"HF={hf_e:+.8f} FCI={fci_e:+.8f} corr={fci_e - hf_e:+.6f}")
    return doc


def build_device(name, n_qubits, coupling, seed):
    rng = np.random.default_rng(seed)
    s_err = {str(q): round(float(np.exp(rng.uniform(np.log(1e-4), np.log(1e-3)))), 8)
             for q in range(n_qubits)}
    t_err = {}
    for a, b in coupling:
        lo, hi = min(a, b), max(a, b)
        t_err[f"{lo}-{hi}"] = round(float(np.exp(rng.uniform(np.log(1e-3), np.log(1e-2)))), 8)
    return {
        "name": name,
        "n_qubits": n_qubits,
        "coupling": [[a, b] for a, b in coupling],
        "s_err": s_err,
        "t_err": t_err,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="fixtures")
    args = ap.parse_args()
    os.makedirs(os.path.join(args.out, "devices"), exist_ok=True)

    molecules = {
        "h2_0740.json": build_molecule("H2", [0.7414], 2),
        "h2_2000.json": build_molecule("H2-stretched", [2.0], 2),
        "h4_1000.json": build_molecule("H4", [1.0, 1.0, 1.0], 4),
        "h4_1500.json": build_molecule("H4-mid", [1.5, 1.5, 1.5], 4),
        "h4_2000.json": build_molecule("H4-stretched", [2.0, 2.0, 2.0], 4),
        "h5p_1000.json": build_molecule("H5+", [1.0] * 4, 4, charge_note="charge +1"),
    }
    for fname, doc in molecules.items():
        with open(os.path.join(args.out, fname), "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")

    linear14 = build_device(
        "linear14", 14, [[i, i + 1] for i in range(13)], seed=11)
    hex16_edges = [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0],
                   [4, 6], [6, 7], [7, 8], [8, 9], [9, 3],
                   [8, 10], [10, 11], [11, 12], [12, 13], [13, 7],
                   [1, 14], [11, 15]]
    hex16 = build_device("hex16", 16, hex16_edges, seed=12)
    for fname, doc in (("linear14.json", linear14), ("hex16.json", hex16)):
        with open(os.path.join(args.out, "devices", fname), "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")
    print("devices: linear14 (path), hex16 (hex fragment + spurs)")


if __name__ == "__main__":
    main()
