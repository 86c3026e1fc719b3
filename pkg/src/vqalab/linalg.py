"""Dense Pauli observables.

Qubit 0 is the leftmost tensor factor (big-endian), so a Z on qubit ``q``
contributes the sign ``(-1) ** bit`` where ``bit = (index >> (n - 1 - q)) & 1``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

MAX_QUBITS = 10

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    operators: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        ops = tuple((int(q), str(p).upper()) for q, p in self.operators)
        qubits = [q for q, _ in ops]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit index in {ops}")
        for q, p in ops:
            if p not in PAULI:
                raise ValueError(f"unknown Pauli letter {p!r}")
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
        object.__setattr__(self, "operators", ops)

    def word(self, n_qubits: int) -> str:
        letters = ["I"] * n_qubits
        for q, p in self.operators:
            letters[q] = p
        return "".join(letters)


@dataclass(eq=False)
class Observable:
    n_qubits: int
    terms: tuple[PauliTerm, ...]
    _dense: np.ndarray | None = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            with self._lock:
                if self._dense is None:
                    mat = np.zeros((self.dim, self.dim), dtype=complex)
                    for term in self.terms:
                        mat += term.coefficient * pauli_matrix(term.word(self.n_qubits))
                    mat.setflags(write=False)
                    self._dense = mat
        return self._dense

    @property
    def is_diagonal(self) -> bool:
        return all(p in "IZ" for t in self.terms for _, p in t.operators)

    def trace(self) -> float:
        return float(np.real(np.trace(self.dense)))


def pauli_matrix(word: str) -> np.ndarray:
    return reduce(np.kron, (PAULI[ch] for ch in word), np.eye(1, dtype=complex))


def build_observable(terms, n_qubits: int) -> Observable:
    """Sum of weighted Pauli strings on ``n_qubits`` qubits.

    ``terms`` may hold :class:`PauliTerm` objects or ``(coefficient, operators)``
    pairs with operators given as ``[(qubit, letter), ...]``.
    """
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    terms = [t if isinstance(t, PauliTerm) else PauliTerm(t[0], tuple(t[1])) for t in terms]
    if not terms:
        raise ValueError("an observable needs at least one term")
    for t in terms:
        for q, _ in t.operators:
            if q >= n_qubits:
                raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
    return Observable(n_qubits, tuple(terms))


def projector_zero(n_qubits: int, qubit: int) -> Observable:
    """|0><0| on ``qubit`` and identity elsewhere, written as (I + Z)/2."""
    return build_observable([(0.5, []), (0.5, [(qubit, "Z")])], n_qubits)


def _check_finite(mat: np.ndarray) -> None:
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix has non-finite entries")


def operator_norm(obs: Observable | np.ndarray) -> float:
    mat = obs.dense if isinstance(obs, Observable) else np.asarray(obs)
    _check_finite(mat)
    if np.allclose(mat, mat.conj().T, atol=1e-12, rtol=0):
        return float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    return float(np.linalg.norm(mat, 2))


def extreme_eigenvalues(obs: Observable | np.ndarray) -> tuple[float, float]:
    mat = obs.dense if isinstance(obs, Observable) else np.asarray(obs)
    _check_finite(mat)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
        raise ValueError("extreme_eigenvalues needs a Hermitian matrix")
    w = np.linalg.eigvalsh(mat)
    return float(w[0]), float(w[-1])
