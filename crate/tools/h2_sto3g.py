#!/usr/bin/env python3
"""H2 / STO-3G two-configuration ground states for the autoencoder data set.

Computes the one- and two-electron integrals over the bonding (g) and
antibonding (u) molecular orbitals from scratch, diagonalizes the 2x2
configuration-interaction matrix in the {|g g>, |u u>} space and writes

  crates/core/data/h2_sto3g_integrals.json  integrals per bond length
  crates/core/data/h2_sto3g.json            ground-state coefficients

Qubits are spin orbitals (g up, g down, u up, u down), so |1100> is the
Hartree-Fock determinant and |0011> the doubly excited one. alpha multiplies
|0011> and beta multiplies |1100>; the sign is fixed by beta > 0.

Run with --check to compare against the textbook values at R = 1.4 bohr.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np
from scipy.special import erf

BOHR_PER_ANGSTROM = 1.0 / 0.529177210903
ZETA = 1.24
# STO-3G contraction of a zeta = 1 Slater 1s function.
EXPONENTS = np.array([2.227660, 0.405771, 0.109818])
COEFFS = np.array([0.154329, 0.535328, 0.444635])
BOND_LENGTHS = [0.5, 1.0, 1.5, 2.0]


def boys0(t):
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * erf(math.sqrt(t))


def primitives():
    a = EXPONENTS * ZETA**2
    d = COEFFS * (2.0 * a / math.pi) ** 0.75
    return a, d


def overlap(a, b, rab2):
    return (math.pi / (a + b)) ** 1.5 * math.exp(-a * b / (a + b) * rab2)


def kinetic(a, b, rab2):
    mu = a * b / (a + b)
    return mu * (3.0 - 2.0 * mu * rab2) * overlap(a, b, rab2)


def nuclear(a, b, rab2, rcp2):
    p = a + b
    return -2.0 * math.pi / p * math.exp(-a * b / p * rab2) * boys0(p * rcp2)


def eri(a, b, c, d, rab2, rcd2, rpq2):
    p, q = a + b, c + d
    pre = 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q))
    return pre * math.exp(-a * b / p * rab2 - c * d / q * rcd2) * boys0(p * q / (p + q) * rpq2)


def ao_integrals(r):
    a, dcoef = primitives()
    centers = [np.zeros(3), np.array([0.0, 0.0, r])]
    S = np.zeros((2, 2))
    H = np.zeros((2, 2))
    G = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            rab2 = float(np.sum((centers[i] - centers[j]) ** 2))
            for p in range(3):
                for q in range(3):
                    ap, aq = a[p], a[q]
                    w = dcoef[p] * dcoef[q]
                    P = (ap * centers[i] + aq * centers[j]) / (ap + aq)
                    S[i, j] += w * overlap(ap, aq, rab2)
                    H[i, j] += w * kinetic(ap, aq, rab2)
                    for c in centers:
                        H[i, j] += w * nuclear(ap, aq, rab2, float(np.sum((P - c) ** 2)))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    rab2 = float(np.sum((centers[i] - centers[j]) ** 2))
                    rcd2 = float(np.sum((centers[k] - centers[l]) ** 2))
                    total = 0.0
                    for p in range(3):
                        for q in range(3):
                            P = (a[p] * centers[i] + a[q] * centers[j]) / (a[p] + a[q])
                            for s in range(3):
                                for t in range(3):
                                    Q = (a[s] * centers[k] + a[t] * centers[l]) / (a[s] + a[t])
                                    rpq2 = float(np.sum((P - Q) ** 2))
                                    total += (
                                        dcoef[p] * dcoef[q] * dcoef[s] * dcoef[t]
                                        * eri(a[p], a[q], a[s], a[t], rab2, rcd2, rpq2)
                                    )
                    G[i, j, k, l] = total
    return S, H, G


def mo_integrals(r):
    S, H, G = ao_integrals(r)
    s12 = S[0, 1]
    C = np.array(
        [
            [1.0 / math.sqrt(2.0 * (1.0 + s12)), 1.0 / math.sqrt(2.0 * (1.0 - s12))],
            [1.0 / math.sqrt(2.0 * (1.0 + s12)), -1.0 / math.sqrt(2.0 * (1.0 - s12))],
        ]
    )
    h = C.T @ H @ C
    g = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, G)
    return {
        "h11": h[0, 0],
        "h22": h[1, 1],
        "j11": g[0, 0, 0, 0],
        "j22": g[1, 1, 1, 1],
        "j12": g[0, 0, 1, 1],
        "k12": g[0, 1, 0, 1],
        "nuclear_repulsion": 1.0 / r,
    }


def ground_state(ints):
    ci = np.array(
        [
            [2.0 * ints["h11"] + ints["j11"], ints["k12"]],
            [ints["k12"], 2.0 * ints["h22"] + ints["j22"]],
        ]
    )
    w, v = np.linalg.eigh(ci)
    c = v[:, 0]
    if c[0] < 0:
        c = -c
    return w[0], c[0], c[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "crates/core/data")
    parser.add_argument("--check", action="store_true")
    args = parser.parse_args()

    if args.check:
        ints = mo_integrals(1.4)
        ref = {"h11": -1.2528, "h22": -0.4756, "j11": 0.6746, "j22": 0.6975, "j12": 0.6636, "k12": 0.1813}
        for k, v in ref.items():
            print(f"{k}: {ints[k]:.4f} (textbook {v:.4f})")
            assert abs(ints[k] - v) < 5e-4, k
        e, cg, cu = ground_state(ints)
        print(f"E_elec = {e:.4f}, E_total = {e + 1 / 1.4:.4f}, c_g = {cg:.4f}, c_u = {cu:.4f}")
        return

    integrals, coefficients = [], []
    for length in BOND_LENGTHS:
        ints = mo_integrals(length * BOHR_PER_ANGSTROM)
        _, cg, cu = ground_state(ints)
        integrals.append({"bond_length_angstrom": length, **{k: round(float(v), 12) for k, v in ints.items()}})
        coefficients.append(
            {"bond_length_angstrom": length, "alpha": [round(float(cu), 12), 0.0], "beta": [round(float(cg), 12), 0.0]}
        )
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "h2_sto3g_integrals.json").write_text(json.dumps(integrals, indent=2) + "\n")
    (args.out / "h2_sto3g.json").write_text(json.dumps(coefficients, indent=2) + "\n")
    print(json.dumps(coefficients, indent=2))


if __name__ == "__main__":
    main()
