"""Regenerate ``src/vqalab/data/h2_bk.csv``.

Needs pyscf (not a runtime dependency of the package):

    pip install pyscf
    python scripts/make_h2_table.py

Recipe: RHF/STO-3G molecular orbitals for H2 at each bond length, the
second-quantized Hamiltonian over the 4 spin orbitals (ordering
0a, 0b, 1a, 1b), mapped to qubits with the Bravyi-Kitaev encoding
b = B n (mod 2) on occupation bits, then projected onto Pauli strings.
The script refuses to write the table unless the projection has exactly
the 15-term structure with the shared coefficients f0..f7.
"""

import csv
import itertools
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf

OUT = Path(__file__).resolve().parents[1] / "src" / "vqalab" / "data" / "h2_bk.csv"
BOND_LENGTHS = [round(0.3 + 0.1 * i, 2) for i in range(19)] + [0.74]

# Bravyi-Kitaev encoding for 4 modes.
BK = np.array([[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [1, 1, 1, 1]])

PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]),
}

# (f index, pauli word over qubits 0..3)
PATTERN = [
    (0, "IIII"), (1, "ZIII"), (2, "IZII"), (3, "IIZI"), (1, "ZZII"),
    (4, "ZIZI"), (5, "IZIZ"), (6, "XZXI"), (6, "YZYI"), (7, "ZZZI"),
    (4, "ZIZZ"), (3, "IZZZ"), (6, "XZXZ"), (6, "YZYZ"), (7, "ZZZZ"),
]


def kron(*ops):
    out = np.eye(1)
    for op in ops:
        out = np.kron(out, op)
    return out


def annihilators(n_modes):
    lower = np.array([[0, 1], [0, 0]])  # |0><1|, occupied = |1>
    ops = []
    for j in range(n_modes):
        factors = [PAULI["Z"]] * j + [lower] + [PAULI["I"]] * (n_modes - j - 1)
        ops.append(kron(*factors))
    return ops


def fermion_hamiltonian(bond_length):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {bond_length}", basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol).run()
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.full(mol, c), c.shape[1])  # chemist (pq|rs)
    n_orb = c.shape[1]
    a = annihilators(2 * n_orb)
    ad = [op.conj().T for op in a]
    dim = 2 ** (2 * n_orb)
    ham = mol.energy_nuc() * np.eye(dim)
    for p, q in itertools.product(range(n_orb), repeat=2):
        for s in range(2):
            ham = ham + h1[p, q] * ad[2 * p + s] @ a[2 * q + s]
    for p, q, r, t in itertools.product(range(n_orb), repeat=4):
        for s1, s2 in itertools.product(range(2), repeat=2):
            ham = ham + 0.5 * eri[p, q, r, t] * (
                ad[2 * p + s1] @ ad[2 * r + s2] @ a[2 * t + s2] @ a[2 * q + s1]
            )
    return ham


def bk_permutation():
    perm = np.zeros((16, 16))
    for idx in range(16):
        bits = np.array([(idx >> (3 - q)) & 1 for q in range(4)])
        enc = BK @ bits % 2
        perm[int("".join(map(str, enc)), 2), idx] = 1
    return perm


def pauli_coefficients(ham):
    coeffs = {}
    for word in itertools.product("IXYZ", repeat=4):
        word = "".join(word)
        c = np.trace(kron(*(PAULI[ch] for ch in word)) @ ham) / 16
        if abs(c) > 1e-12:
            coeffs[word] = c
    return coeffs


def extract_f(coeffs):
    if set(coeffs) != {w for _, w in PATTERN}:
        raise RuntimeError(f"unexpected Pauli support: {sorted(coeffs)}")
    f = [None] * 8
    for j, word in PATTERN:
        c = coeffs[word]
        if abs(c.imag) > 1e-12:
            raise RuntimeError(f"complex coefficient on {word}")
        if f[j] is None:
            f[j] = c.real
        elif abs(f[j] - c.real) > 1e-10:
            raise RuntimeError(f"f{j} not shared: {f[j]} vs {c.real} on {word}")
    return f


def main():
    perm = bk_permutation()
    rows = []
    for r in sorted(BOND_LENGTHS):
        ham = perm @ fermion_hamiltonian(r) @ perm.T
        f = extract_f(pauli_coefficients(ham))
        rows.append([f"{r:.2f}"] + [repr(float(v)) for v in f])
        print(f"{r:.2f}  E0 = {np.linalg.eigvalsh(ham)[0]:.6f}")
    with OUT.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bond_length"] + [f"f{j}" for j in range(8)])
        writer.writerows(rows)


if __name__ == "__main__":
    main()
