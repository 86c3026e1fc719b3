"""Gradients of circuit expectations with respect to trainable angles."""

from __future__ import annotations

import math

import numpy as np

from .circuits import ROTATIONS, Circuit
from .linalg import Observable
from .simulator import StateVector, apply_1q, compile_plan, evolve_batch, expectations_batch, rotation_angles

SHIFT = math.pi / 2


def shift_table(c: Circuit, params) -> tuple[np.ndarray, list[int]]:
    """Angle table for the parameter-shift rule.

    Row 0 holds the unshifted angles; rows 2i+1 / 2i+2 shift the i-th trainable
    rotation by +pi/2 / -pi/2. Also returns the parameter index of each
    trainable rotation, in the same order.
    """
    base = rotation_angles(c, params)
    owners = []
    cols = []
    r = 0
    for g in c.gates:
        if g.kind == "CNOT":
            continue
        if g.trainable:
            if g.kind not in ROTATIONS:
                raise ValueError(f"parameter shift needs Pauli rotations, got {g.kind}")
            owners.append(g.index)
            cols.append(r)
        r += 1
    table = np.tile(base, (1 + 2 * len(cols), 1))
    for i, col in enumerate(cols):
        table[2 * i + 1, col] += SHIFT
        table[2 * i + 2, col] -= SHIFT
    return table, owners


def fold_shifts(values: np.ndarray, owners: list[int], param_count: int) -> np.ndarray:
    """Collapse shifted evaluations (last axis laid out as in :func:`shift_table`) into a gradient.

    Rotations sharing a parameter contribute additively.
    """
    values = np.asarray(values)
    plus = values[..., 1::2]
    minus = values[..., 2::2]
    per_gate = 0.5 * (plus - minus)
    grad = np.zeros(values.shape[:-1] + (param_count,))
    for i, j in enumerate(owners):
        grad[..., j] += per_gate[..., i]
    return grad


def _conjugate_by(m: np.ndarray, op, mats: np.ndarray | None, n: int) -> np.ndarray:
    """U^+ M U for one plan step U (a permutation or a shared 2x2 block)."""
    if isinstance(op, np.ndarray):
        inv = np.argsort(op)
        return m[inv][:, inv]
    u = mats[0]
    # rows r of X map to U r, so X U = apply(X, U^T) and U^+ X = apply(X^T, U^+)^T
    mu = apply_1q(m, u.T[None], op.qubit, n)
    return apply_1q(np.ascontiguousarray(mu.T), u.conj().T[None], op.qubit, n).T


def value_and_gradient_batch(c: Circuit, params, obs: Observable, states: np.ndarray):
    """Expectation and parameter-shift gradient for every input state row.

    Returns ``(values, grads)`` with shapes ``(E,)`` and ``(E, param_count)``.

    Each shifted evaluation <psi_+-| S^+ O S |psi_+-> is formed with the
    observable already pulled back through the suffix S that follows the
    shifted rotation, so the suffix is applied once per step rather than once
    per shifted copy.
    """
    table, owners = shift_table(c, params)
    base = table[0]
    states = np.asarray(states, dtype=complex)
    n = c.n_qubits
    if states.ndim != 2 or states.shape[1] != 2**n:
        raise ValueError(f"states must have shape (E, {2 ** n})")
    if obs.n_qubits != n:
        raise ValueError("observable and circuit sizes differ")
    e = states.shape[0]
    shift_of = {}
    r = 0
    for g in c.gates:
        if g.kind == "CNOT":
            continue
        if g.trainable:
            shift_of[r] = len(shift_of)
        r += 1

    plan = compile_plan(c)
    shared = [None if isinstance(op, np.ndarray) else op.matrices(base[None, :]) for op in plan]
    before = []
    x = states
    for op, mats in zip(plan, shared):
        before.append(x)
        x = x[:, op] if mats is None else apply_1q(x, mats, op.qubit, n)
    vals = np.empty((e, table.shape[0]))
    vals[:, 0] = expectations_batch(obs, x)

    m = np.array(obs.dense, dtype=complex)
    for k in range(len(plan) - 1, -1, -1):
        op = plan[k]
        ids = [] if shared[k] is None else [shift_of[col] for _, col in op.parts if col in shift_of]
        if ids:
            rows = np.ravel([[2 * i + 1, 2 * i + 2] for i in ids])
            mats = np.repeat(op.matrices(table[rows]), e, axis=0)
            y = apply_1q(np.tile(before[k], (len(rows), 1)), mats, op.qubit, n)
            vals[:, rows] = np.real(np.einsum("bi,bi->b", y.conj(), y @ m.T)).reshape(len(rows), e).T
        m = _conjugate_by(m, op, shared[k], n)
    return vals[:, 0], fold_shifts(vals, owners, c.param_count)


def parameter_shift_gradient(c: Circuit, params, obs: Observable, psi0: StateVector) -> np.ndarray:
    _, grads = value_and_gradient_batch(c, params, obs, psi0.amplitudes[None, :])
    return grads[0]


def finite_difference_gradient(c: Circuit, params, obs: Observable, psi0: StateVector, step: float = 1e-5) -> np.ndarray:
    """Central differences (E(theta_j + h) - E(theta_j - h)) / 2h, one parameter at a time."""
    if step <= 0:
        raise ValueError("step must be positive")
    params = np.asarray(params, dtype=float)
    p = c.param_count
    if p == 0:
        return np.zeros(0)
    rows = np.repeat(params[None, :], 2 * p, axis=0)
    for j in range(p):
        rows[2 * j, j] += step
        rows[2 * j + 1, j] -= step
    table = np.array([rotation_angles(c, row) for row in rows]).reshape(2 * p, -1)
    out = evolve_batch(c, table, np.repeat(psi0.amplitudes[None, :], 2 * p, axis=0))
    vals = expectations_batch(obs, out)
    return (vals[0::2] - vals[1::2]) / (2 * step)
