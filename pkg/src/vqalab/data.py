"""Synthetic classification data and the H2 qubit Hamiltonian table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .circuits import ENCODING_QUBITS, build_encoding_circuit, build_hardware_efficient
from .linalg import Observable, build_observable, projector_zero
from .simulator import evolve_batch, expectations_batch, rotation_angles

# ------------------------------------------------------------------ randomness

# Named substreams of one integer seed (PCG64 through numpy's SeedSequence).
STREAM_FEATURES = 0
STREAM_CONCEPT = 1
STREAM_SPLIT = 2
STREAM_INIT = 3
STREAM_SHUFFLE = 4


def rng_for(seed: int, stream: int, *extra: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, *extra])))


# ------------------------------------------------------------ QNN data set

ENCODING_TEMPLATE = build_encoding_circuit([0.0] * ENCODING_QUBITS)
CONCEPT_LAYERS = 2
ATTEMPT_CAP = 10**6


def qnn_observable() -> Observable:
    """|0><0| on the last of the seven qubits."""
    return projector_zero(ENCODING_QUBITS, ENCODING_QUBITS - 1)


def encode_states(x: np.ndarray) -> np.ndarray:
    """Encoded input states for a batch of feature rows, shape ``(B, 2**7)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != ENCODING_QUBITS:
        raise ValueError(f"expected {ENCODING_QUBITS} features per row")
    if np.any(x < 0) or np.any(x >= 2 * math.pi):
        raise ValueError("features must lie in [0, 2pi)")
    psi0 = np.zeros((x.shape[0], 2**ENCODING_QUBITS), dtype=complex)
    psi0[:, 0] = 1.0
    # the template applies its RY layer twice, in the same qubit order
    return evolve_batch(ENCODING_TEMPLATE, np.hstack([x, x]), psi0)


@dataclass(frozen=True)
class Example:
    x: tuple[float, ...]
    y: int
    score: float


@dataclass(frozen=True, eq=False)
class Dataset:
    examples: tuple[Example, ...]
    train: np.ndarray
    test: np.ndarray
    target_params: np.ndarray
    delta: float
    draws: int = 0  # candidates examined under the accepted concept

    @property
    def x(self) -> np.ndarray:
        return np.array([e.x for e in self.examples])

    @property
    def y(self) -> np.ndarray:
        return np.array([e.y for e in self.examples])

    @property
    def scores(self) -> np.ndarray:
        return np.array([e.score for e in self.examples])

    def to_csv(self) -> str:
        split = np.empty(len(self.examples), dtype=object)
        split[self.train] = "train"
        split[self.test] = "test"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(ENCODING_QUBITS)] + ["y", "score", "split"])
        for e, s in zip(self.examples, split):
            w.writerow([repr(v) for v in e.x] + [e.y, repr(e.score), s])
        return buf.getvalue()


def concept_scores(x: np.ndarray, target_params: np.ndarray) -> np.ndarray:
    v = build_hardware_efficient(ENCODING_QUBITS, CONCEPT_LAYERS)
    out = evolve_batch(v, rotation_angles(v, target_params), encode_states(x))
    return expectations_batch(qnn_observable(), out)


def generate_dataset(seed: int, n: int = 400, delta: float = 0.2, train_size: int = 60, chunk: int = 512) -> Dataset:
    """Labelled points whose labels come from a hidden 2-layer circuit.

    Candidates are uniform in [0, 2pi)^7. A candidate scoring >= 0.5 + delta is
    labelled 1, one scoring <= 0.5 - delta is labelled 0, anything in between
    is rejected. Drawing stops once each class holds n/2 points. If a class is
    still short after ATTEMPT_CAP draws, the hidden parameters are redrawn from
    the next concept substream and generation restarts.
    """
    if n <= 0 or n % 2:
        raise ValueError("n must be a positive even number")
    if not 0 < train_size < n or train_size % 2:
        raise ValueError("train_size must be even and smaller than n")
    half = n // 2
    n_params = 3 * ENCODING_QUBITS * CONCEPT_LAYERS
    for attempt in range(1000):
        target = rng_for(seed, STREAM_CONCEPT, attempt).uniform(0, 2 * math.pi, n_params)
        feats = rng_for(seed, STREAM_FEATURES, attempt)
        buckets: dict[int, list[Example]] = {0: [], 1: []}
        draws = 0
        while min(len(b) for b in buckets.values()) < half and draws < ATTEMPT_CAP:
            x = feats.uniform(0, 2 * math.pi, (chunk, ENCODING_QUBITS))
            for row, s in zip(x, concept_scores(x, target)):
                if min(len(b) for b in buckets.values()) == half or draws == ATTEMPT_CAP:
                    break
                draws += 1
                y = 1 if s >= 0.5 + delta else 0 if s <= 0.5 - delta else None
                if y is not None and len(buckets[y]) < half:
                    buckets[y].append(Example(tuple(float(v) for v in row), y, float(s)))
        if min(len(b) for b in buckets.values()) == half:
            break
    else:
        raise RuntimeError("could not build a balanced data set")

    # class 0 first, then class 1, each in draw order
    examples = tuple(buckets[0] + buckets[1])
    rng = rng_for(seed, STREAM_SPLIT)
    per_class = train_size // 2
    train, test = [], []
    for offset in (0, half):
        idx = offset + rng.permutation(half)
        train += idx[:per_class].tolist()
        test += idx[per_class:].tolist()
    return Dataset(examples, np.sort(train), np.sort(test), target, delta, draws)


def read_dataset_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Parse the CSV written by :meth:`Dataset.to_csv` into ``(x, y, score, is_train)``."""
    rows = list(csv.DictReader(io.StringIO(text)))
    x = np.array([[float(r[f"x{j}"]) for j in range(ENCODING_QUBITS)] for r in rows])
    y = np.array([int(r["y"]) for r in rows])
    score = np.array([float(r["score"]) for r in rows])
    is_train = np.array([r["split"] == "train" for r in rows])
    return x, y, score, is_train


# ------------------------------------------------------------------ H2 table

H2_COLUMNS = ["bond_length"] + [f"f{j}" for j in range(8)]

# (coefficient index, Pauli operators) for the 15 terms of the qubit Hamiltonian
H2_TERMS = [
    (0, []),
    (1, [(0, "Z")]),
    (2, [(1, "Z")]),
    (3, [(2, "Z")]),
    (1, [(0, "Z"), (1, "Z")]),
    (4, [(0, "Z"), (2, "Z")]),
    (5, [(1, "Z"), (3, "Z")]),
    (6, [(0, "X"), (1, "Z"), (2, "X")]),
    (6, [(0, "Y"), (1, "Z"), (2, "Y")]),
    (7, [(0, "Z"), (1, "Z"), (2, "Z")]),
    (4, [(0, "Z"), (2, "Z"), (3, "Z")]),
    (3, [(1, "Z"), (2, "Z"), (3, "Z")]),
    (6, [(0, "X"), (1, "Z"), (2, "X"), (3, "Z")]),
    (6, [(0, "Y"), (1, "Z"), (2, "Y"), (3, "Z")]),
    (7, [(0, "Z"), (1, "Z"), (2, "Z"), (3, "Z")]),
]


def build_h2_observable(f) -> Observable:
    f = [float(v) for v in (f.f if isinstance(f, H2Problem) else f)]
    if len(f) != 8 or not all(math.isfinite(v) for v in f):
        raise ValueError("need eight finite coefficients f0..f7")
    return build_observable([(f[j], ops) for j, ops in H2_TERMS], 4)


@dataclass(frozen=True, eq=False)
class H2Problem:
    bond_length: float
    f: tuple[float, ...]

    @property
    def observable(self) -> Observable:
        obs = self.__dict__.get("_obs")
        if obs is None:
            obs = build_h2_observable(self.f)
            object.__setattr__(self, "_obs", obs)
        return obs


def default_h2_path() -> Path:
    return Path(str(resources.files("vqalab") / "data" / "h2_bk.csv"))


def load_h2_table(path: str | Path | None = None) -> list[H2Problem]:
    """Read ``bond_length,f0,...,f7`` rows (Angstrom, Hartree), sorted by bond length."""
    path = default_h2_path() if path is None else Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        header = [h.strip() for h in header]
        missing = [c for c in H2_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"{path}: missing column(s) {missing}")
        pos = [header.index(c) for c in H2_COLUMNS]
        problems: dict[float, H2Problem] = {}
        for lineno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(row[i]) for i in pos]
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: cannot parse row {row!r}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            r = vals[0]
            if r in problems:
                raise ValueError(f"{path}:{lineno}: duplicate bond length {r}")
            problems[r] = H2Problem(r, tuple(vals[1:]))
    if not problems:
        raise ValueError(f"{path}: no data rows")
    return [problems[r] for r in sorted(problems)]
