"""SGD and Adam training loops for QNN classification and VQE."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, gate_counts
from .data import STREAM_INIT, STREAM_SHUFFLE, Dataset, encode_states, rng_for
from .gradients import value_and_gradient_batch
from .linalg import Observable
from .simulator import evolve_batch, expectations_batch, rotation_angles, zero_state


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 0.2
    batch_size: int = 4
    epochs: int = 20  # QNN: passes over the training split; VQE: max iterations
    shuffle_each_epoch: bool = True
    seed: int = 0
    tolerance: float | None = None  # VQE stopping rule on |dE|

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")


def vqe_sgd_config(seed: int = 0) -> SgdConfig:
    return SgdConfig(learning_rate=0.4, epochs=300, tolerance=1e-6, seed=seed)


ADAM_VARIANTS = ("standard", "paper_literal")


@dataclass(frozen=True)
class AdamConfig:
    eta0: float = 0.4
    beta1: float = 0.9
    beta2: float = 0.99
    epsilon: float = 1e-6
    max_iterations: int = 81
    tolerance: float = 1e-6
    variant: str = "standard"
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.variant not in ADAM_VARIANTS:
            raise ValueError(f"unknown Adam variant {self.variant!r}")
        if self.eta0 <= 0 or self.max_iterations < 0:
            raise ValueError("invalid Adam configuration")


@dataclass(frozen=True)
class AdamState:
    theta: np.ndarray
    a: np.ndarray
    b: np.ndarray
    eta: float
    t: int = 0

    @classmethod
    def fresh(cls, theta, cfg: AdamConfig) -> AdamState:
        theta = np.asarray(theta, dtype=float)
        return cls(theta, np.zeros_like(theta), np.zeros_like(theta), cfg.eta0, 0)


def adam_step(state: AdamState, gradient, cfg: AdamConfig) -> AdamState:
    """One Adam update.

    ``standard`` is bias-corrected Adam with a constant rate ``eta0``.
    ``paper_literal`` rescales the moments by 1/(1-beta) every step and
    multiplies the rate by sqrt(1-beta2)/(1-beta1), without bias correction.
    """
    g = np.asarray(gradient, dtype=float)
    b1, b2, eps = cfg.beta1, cfg.beta2, cfg.epsilon
    t = state.t + 1
    if cfg.variant == "standard":
        a = b1 * state.a + (1 - b1) * g
        b = b2 * state.b + (1 - b2) * g**2
        a_hat = a / (1 - b1**t)
        b_hat = b / (1 - b2**t)
        theta = state.theta - cfg.eta0 * a_hat / (np.sqrt(b_hat) + eps)
        return AdamState(theta, a, b, cfg.eta0, t)
    a = (b1 * state.a + (1 - b1) * g) / (1 - b1)
    b = (b2 * state.b + (1 - b2) * g**2) / (1 - b2)
    eta = state.eta * math.sqrt(1 - b2) / (1 - b1)
    theta = state.theta - eta * a / (np.sqrt(b) + eps)
    return AdamState(theta, a, b, eta, t)


def sgd_step(theta, gradient, eta: float) -> np.ndarray:
    return np.asarray(theta, dtype=float) - eta * np.asarray(gradient, dtype=float)


def qnn_loss(h, y):
    """Squared error; on h in [0, 1] it is 2-Lipschitz and bounded by 1."""
    return (np.asarray(h) - np.asarray(y)) ** 2


def predict(h):
    return (np.asarray(h) >= 0.5).astype(int)


@dataclass
class TrainTrace:
    losses: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    test_acc: list[float] = field(default_factory=list)
    test_losses: list[float] = field(default_factory=list)
    params: np.ndarray | None = None
    converged_step: int | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "energy_or_loss", "train_acc", "test_acc"])
        n = max(len(self.losses), len(self.train_acc))
        for i in range(n):
            w.writerow([
                i,
                repr(self.losses[i]) if i < len(self.losses) else "",
                repr(self.train_acc[i]) if i < len(self.train_acc) else "",
                repr(self.test_acc[i]) if i < len(self.test_acc) else "",
            ])
        return buf.getvalue()


def init_params(n: int, seed: int) -> np.ndarray:
    return rng_for(seed, STREAM_INIT).uniform(0.0, 2 * math.pi, n)


# --------------------------------------------------------------------- QNN


class QnnModel:
    """Hypothesis h(x) = K * <O>_{ansatz(encoded x)} + (1 - K) Tr(O) / 2^N.

    K = (1-p)^N_g for depolarizing rate p on every ansatz gate, or 1 when noiseless.
    """

    def __init__(self, ansatz: Circuit, observable: Observable, noise_p: float | None = None):
        if observable.n_qubits != ansatz.n_qubits:
            raise ValueError("observable and ansatz sizes differ")
        self.ansatz = ansatz
        self.observable = observable
        if noise_p is None:
            self.scale, self.offset = 1.0, 0.0
        else:
            if not 0.0 <= noise_p <= 1.0:
                raise ValueError("noise_p must lie in [0, 1]")
            self.scale = (1.0 - noise_p) ** gate_counts(ansatz).n_g
            self.offset = (1.0 - self.scale) * observable.trace() / 2**ansatz.n_qubits

    def hypotheses(self, params, states: np.ndarray) -> np.ndarray:
        out = evolve_batch(self.ansatz, rotation_angles(self.ansatz, params), states)
        return self.scale * expectations_batch(self.observable, out) + self.offset

    def batch_gradient(self, params, states: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
        """Mean loss over the batch and its gradient."""
        vals, grads = value_and_gradient_batch(self.ansatz, params, self.observable, states)
        h = self.scale * vals + self.offset
        resid = h - labels
        grad = (2 * resid * self.scale) @ grads / len(labels)
        return float(np.mean(resid**2)), grad


def train_qnn(dataset: Dataset, ansatz: Circuit, observable: Observable, cfg: SgdConfig, noise_p: float | None = None, states: np.ndarray | None = None) -> TrainTrace:
    """Mini-batch gradient descent on the mean squared loss.

    Entry 0 of each trace list is measured before any update; entry e after epoch e.
    ``states`` may carry precomputed encodings of ``dataset.x``.
    """
    train, test = np.asarray(dataset.train), np.asarray(dataset.test)
    if len(train) == 0:
        raise ValueError("empty training split")
    if cfg.batch_size > len(train):
        raise ValueError("batch larger than the training split")
    model = QnnModel(ansatz, observable, noise_p)
    states = encode_states(dataset.x) if states is None else states
    y = dataset.y
    theta = init_params(ansatz.param_count, cfg.seed)
    shuffler = rng_for(cfg.seed, STREAM_SHUFFLE)
    trace = TrainTrace()

    def record(theta):
        h = model.hypotheses(theta, states)
        pred = predict(h)
        loss = qnn_loss(h, y)
        trace.losses.append(float(np.mean(loss[train])))
        trace.test_losses.append(float(np.mean(loss[test])) if len(test) else float("nan"))
        trace.train_acc.append(float(np.mean(pred[train] == y[train])))
        trace.test_acc.append(float(np.mean(pred[test] == y[test])) if len(test) else float("nan"))

    record(theta)
    for _ in range(cfg.epochs):
        order = shuffler.permutation(train) if cfg.shuffle_each_epoch else train
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            _, grad = model.batch_gradient(theta, states[idx], y[idx])
            theta = sgd_step(theta, grad, cfg.learning_rate)
        record(theta)
    trace.params = theta
    return trace


# --------------------------------------------------------------------- VQE


def train_vqe(hamiltonian: Observable, ansatz: Circuit, optimizer: SgdConfig | AdamConfig, init: np.ndarray | None = None) -> TrainTrace:
    """Minimize <0|U^+ H U|0> from a uniform random start.

    ``losses[t]`` is the energy at the t-th parameter vector. Training stops after
    the configured number of updates, or as soon as two consecutive energies
    differ by at most the tolerance (``converged_step`` is then that t).
    """
    if hamiltonian.n_qubits != ansatz.n_qubits:
        raise ValueError("Hamiltonian and ansatz sizes differ")
    if isinstance(optimizer, AdamConfig):
        max_iter, tol = optimizer.max_iterations, optimizer.tolerance
    elif isinstance(optimizer, SgdConfig):
        max_iter, tol = optimizer.epochs, optimizer.tolerance
    else:
        raise TypeError(f"unsupported optimizer config {type(optimizer).__name__}")
    theta = init_params(ansatz.param_count, optimizer.seed) if init is None else np.asarray(init, dtype=float)
    psi0 = zero_state(ansatz.n_qubits).amplitudes[None, :]
    adam = AdamState.fresh(theta, optimizer) if isinstance(optimizer, AdamConfig) else None
    trace = TrainTrace()
    for t in range(max_iter + 1):
        vals, grads = value_and_gradient_batch(ansatz, theta, hamiltonian, psi0)
        trace.losses.append(float(vals[0]))
        if t > 0 and tol is not None and abs(trace.losses[-1] - trace.losses[-2]) <= tol:
            trace.converged_step = t
            break
        if t == max_iter:
            break
        if adam is not None:
            adam = adam_step(adam, grads[0], optimizer)
            theta = adam.theta
        else:
            theta = sgd_step(theta, grads[0], optimizer.learning_rate)
    trace.params = theta
    return trace


__all__ = [
    "ADAM_VARIANTS", "AdamConfig", "AdamState", "QnnModel", "SgdConfig", "TrainTrace",
    "adam_step", "init_params", "predict", "qnn_loss", "sgd_step",
    "train_qnn", "train_vqe", "vqe_sgd_config",
]
