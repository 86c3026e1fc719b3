"""Exact statevector and density-matrix simulation.

Rotations follow R_P(theta) = exp(-i theta P / 2). Gates act by index
arithmetic on the amplitude array; no 2^N x 2^N unitary is ever formed.

The batched core works on a stack of states of shape ``(B, 2**N)`` together
with an angle table of shape ``(B, R)`` (or ``(R,)``), one column per rotation
gate in circuit order, so parameter-shift evaluations and many input states
run through each gate in a single numpy pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import Circuit, gate_counts
from .linalg import Observable

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2 ** self.n_qubits} amplitudes, got shape {amp.shape}")
        if abs(np.linalg.norm(amp) - 1.0) > NORM_TOL:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "amplitudes", amp)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = 2**self.n_qubits
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_state(cls, psi: StateVector) -> DensityMatrix:
        a = psi.amplitudes
        return cls(psi.n_qubits, np.outer(a, a.conj()))

    def expectation(self, obs: Observable) -> float:
        return float(np.real(np.einsum("ij,ji->", obs.dense, self.matrix)))


def zero_state(n_qubits: int) -> StateVector:
    amp = np.zeros(2**n_qubits, dtype=complex)
    amp[0] = 1.0
    return StateVector(n_qubits, amp)


def basis_state(n_qubits: int, bits: str) -> StateVector:
    amp = np.zeros(2**n_qubits, dtype=complex)
    amp[int(bits, 2)] = 1.0
    return StateVector(n_qubits, amp)


# ---------------------------------------------------------------- batched core


@lru_cache(maxsize=None)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    cbit = (idx >> (n - 1 - control)) & 1
    return idx ^ (cbit << (n - 1 - target))


def rotation_matrices(kind: str, angles) -> np.ndarray:
    """Stack of 2x2 rotation matrices, shape ``(len(angles), 2, 2)``."""
    half = np.asarray(angles, dtype=float).reshape(-1) / 2
    c, s = np.cos(half), np.sin(half)
    m = np.empty((half.size, 2, 2), dtype=complex)
    if kind == "RZ":
        m[:, 0, 0] = np.exp(-1j * half)
        m[:, 1, 1] = np.exp(1j * half)
        m[:, 0, 1] = m[:, 1, 0] = 0
    elif kind == "RY":
        m[:, 0, 0] = m[:, 1, 1] = c
        m[:, 0, 1] = -s
        m[:, 1, 0] = s
    elif kind == "RX":
        m[:, 0, 0] = m[:, 1, 1] = c
        m[:, 0, 1] = m[:, 1, 0] = -1j * s
    else:
        raise ValueError(f"not a rotation: {kind}")
    return m


def apply_1q(states: np.ndarray, mats: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply per-row (or shared, if ``mats`` has one entry) 2x2 matrices on ``qubit``."""
    b = states.shape[0]
    rest = 2 ** (n - qubit - 1)
    if mats.shape[0] == 1 and rest >= 8:
        # one shared matrix over long contiguous runs: a batched matmul is fastest
        return np.matmul(mats[0], states.reshape(-1, 2, rest)).reshape(b, -1)
    v = states.reshape(b, 2**qubit, 2, rest)
    m = mats.reshape(-1, 2, 2, 1, 1)
    s0, s1 = v[:, :, 0, :], v[:, :, 1, :]
    out = np.empty_like(v)
    out[:, :, 0, :] = m[:, 0, 0] * s0 + m[:, 0, 1] * s1
    out[:, :, 1, :] = m[:, 1, 0] * s0 + m[:, 1, 1] * s1
    return out.reshape(b, -1)


@dataclass(frozen=True)
class _Fused:
    qubit: int
    parts: tuple[tuple[str, int], ...]  # (kind, rotation column), in application order

    def matrices(self, angles: np.ndarray) -> np.ndarray:
        """Product of the parts for each row of ``angles`` (shape ``(B, R)``)."""
        out = None
        for kind, col in self.parts:
            m = rotation_matrices(kind, angles[:, col])
            out = m if out is None else m @ out
        return out


def compile_plan(c: Circuit) -> list:
    """Circuit as a list of fused single-qubit blocks and merged CNOT permutations.

    Rotations commute past gates on other qubits only when nothing in between
    touches their qubit; the plan never reorders, it only merges neighbours.
    """
    cached = c.__dict__.get("_plan")
    if cached is not None:
        return cached
    n = c.n_qubits
    plan: list = []
    r = 0
    for g in c.gates:
        if g.kind == "CNOT":
            perm = _cnot_permutation(n, *g.qubits)
            if plan and isinstance(plan[-1], np.ndarray):
                plan[-1] = plan[-1][perm]
            else:
                plan.append(perm)
        else:
            q = g.qubits[0]
            if plan and isinstance(plan[-1], _Fused) and plan[-1].qubit == q:
                plan[-1] = _Fused(q, plan[-1].parts + ((g.kind, r),))
            else:
                plan.append(_Fused(q, ((g.kind, r),)))
            r += 1
    object.__setattr__(c, "_plan", plan)
    return plan


def rotation_angles(c: Circuit, params) -> np.ndarray:
    """Angle of every rotation gate, in circuit order, for one parameter vector."""
    params = np.asarray(params, dtype=float)
    if params.shape != (c.param_count,):
        raise ValueError(f"expected {c.param_count} parameters, got shape {params.shape}")
    return np.array(
        [params[g.index] if g.trainable else g.angle for g in c.gates if g.kind != "CNOT"],
        dtype=float,
    )


def n_rotations(c: Circuit) -> int:
    return sum(g.kind != "CNOT" for g in c.gates)


def evolve_batch(c: Circuit, angles, states: np.ndarray) -> np.ndarray:
    """Apply ``c`` to each row of ``states`` with per-row rotation angles.

    ``angles`` has shape ``(R,)`` (shared by every row) or ``(B, R)``.
    """
    n = c.n_qubits
    states = np.asarray(states, dtype=complex)
    if states.ndim != 2 or states.shape[1] != 2**n:
        raise ValueError(f"states must have shape (B, {2 ** n})")
    angles = np.asarray(angles, dtype=float)
    if angles.ndim == 1:
        angles = angles[None, :]
    if angles.shape[1] != n_rotations(c):
        raise ValueError(f"angle table has {angles.shape[1]} columns for {n_rotations(c)} rotations")
    for op in compile_plan(c):
        if isinstance(op, np.ndarray):
            states = states[:, op]
        else:
            states = apply_1q(states, op.matrices(angles), op.qubit, n)
    return states


def expectations_batch(obs: Observable, states: np.ndarray) -> np.ndarray:
    if obs.is_diagonal:
        diag = np.real(np.diag(obs.dense))
        return (np.abs(states) ** 2) @ diag
    return np.real(np.einsum("bi,bi->b", states.conj(), states @ obs.dense.T))


# ---------------------------------------------------------------- public API


def apply_circuit(c: Circuit, params, psi0: StateVector) -> StateVector:
    if psi0.n_qubits != c.n_qubits:
        raise ValueError("state and circuit sizes differ")
    out = evolve_batch(c, rotation_angles(c, params), psi0.amplitudes[None, :])[0]
    return StateVector(c.n_qubits, out)


def expectation(c: Circuit, params, obs: Observable, psi0: StateVector) -> float:
    if obs.n_qubits != c.n_qubits:
        raise ValueError("observable and circuit sizes differ")
    psi = apply_circuit(c, params, psi0)
    return float(expectations_batch(obs, psi.amplitudes[None, :])[0])


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing rate must lie in [0, 1], got {p}")


def apply_circuit_depolarizing(c: Circuit, params, rho0: DensityMatrix, p: float) -> DensityMatrix:
    """Evolve ``rho0`` with the global channel rho -> (1-p) U rho U^+ + p I / 2^N after every gate."""
    _check_p(p)
    if rho0.n_qubits != c.n_qubits:
        raise ValueError("state and circuit sizes differ")
    d = 2**c.n_qubits
    angles = rotation_angles(c, params)
    rho = rho0.matrix
    r = 0
    for g in c.gates:
        single = Circuit(c.n_qubits, [g if g.kind == "CNOT" else type(g)(g.kind, g.qubits, angle=0.0)], 0)
        a = angles[r : r + 1] if g.kind != "CNOT" else angles[:0]
        r += g.kind != "CNOT"
        # rows of M^T are the columns of M, so U M = evolve(M^T)^T;
        # then U rho U^+ = (U (U rho)^+)^+ = conj(evolve(conj(U rho)))
        left = evolve_batch(single, a, rho.T).T
        rho = evolve_batch(single, a, left.conj()).conj()
        rho = (1 - p) * rho + (p / d) * np.eye(d)
    return DensityMatrix(c.n_qubits, rho)


def depolarizing_factor(c: Circuit, p: float) -> float:
    _check_p(p)
    return (1.0 - p) ** gate_counts(c).n_g


def depolarizing_closed_form(c: Circuit, params, obs: Observable, psi0: StateVector, p: float) -> float:
    """(1-p)^N_g * ideal expectation + (1 - (1-p)^N_g) * Tr(O) / 2^N."""
    k = depolarizing_factor(c, p)
    ideal = expectation(c, params, obs, psi0)
    return k * ideal + (1 - k) * obs.trace() / 2**c.n_qubits
