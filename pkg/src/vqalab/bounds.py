"""Covering-number and generalization bounds for parameterized circuits.

Covering numbers are astronomically large for any realistic circuit, so every
covering bound is returned as its natural logarithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

EPS_MAX = 0.1


@dataclass(frozen=True)
class BoundInput:
    n_gt: int
    n_g: int | None = None  # defaults to n_gt
    d: int = 2
    k: int = 1
    norm_o: float = 1.0
    epsilon: float = 0.05
    p: float = 0.0
    n: int = 1
    l1: float = 1.0
    c1: float = 1.0
    delta: float = 0.05
    allow_any_epsilon: bool = False  # exploratory use outside (0, 1/10]

    def __post_init__(self):
        if self.n_g is None:
            object.__setattr__(self, "n_g", self.n_gt)
        if self.n_gt < 0 or self.n_g < 0:
            raise ValueError("gate counts must be non-negative")
        if self.n_gt > self.n_g:
            raise ValueError("n_gt cannot exceed n_g")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if self.k < 1:
            raise ValueError("k must be positive")
        if not self.norm_o > 0:
            raise ValueError("norm_o must be positive")
        _check_epsilon(self.epsilon, self.allow_any_epsilon)
        if not 0.0 <= self.p < 1.0:
            raise ValueError("p must lie in [0, 1)")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class LogBound:
    ln_value: float
    formula_id: str

    def __post_init__(self):
        if not math.isfinite(self.ln_value):
            raise ValueError(f"{self.formula_id}: bound is not finite")


def _check_epsilon(epsilon: float, allow_any: bool = False) -> None:
    if allow_any:
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
    elif not 0.0 < epsilon <= EPS_MAX:
        # the upper end is kept so the standard eps = 0.1 table values are computable
        raise ValueError(f"epsilon must lie in (0, {EPS_MAX}], got {epsilon}")


def _ln_1mp(p: float) -> float:
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    return math.log1p(-p)


def _ideal_ln(b: BoundInput) -> float:
    dim = b.d ** (2 * b.k) * b.n_gt
    if b.n_gt == 0:
        return 0.0
    return dim * math.log(7 * b.n_gt * b.norm_o / b.epsilon)


def ln_covering_ideal(b: BoundInput) -> LogBound:
    """ln N = d^2k N_gt ln(7 N_gt ||O|| / eps)."""
    return LogBound(_ideal_ln(b), "ideal")


def ln_covering_noisy_general(b: BoundInput) -> LogBound:
    """ln N = ln(2 ||O||) + d^2k N_gt ln(7 N_gt / eps), for any noise channel."""
    tail = 0.0 if b.n_gt == 0 else b.d ** (2 * b.k) * b.n_gt * math.log(7 * b.n_gt / b.epsilon)
    return LogBound(math.log(2 * b.norm_o) + tail, "general_noise")


def ln_covering_depolarizing(b: BoundInput) -> LogBound:
    """Ideal bound shifted by N_g ln(1 - p)."""
    return LogBound(b.n_g * _ln_1mp(b.p) + _ideal_ln(b), "depolarizing")


FAMILIES = ("hardware_efficient", "mps", "tree", "uccsd")


def ln_covering_ansatz_family(family: str, n_qubits: int, norm_o: float, epsilon: float, p: float | None = None,
                              layers: int | None = None, k: int = 1, d: int = 2) -> LogBound:
    """Closed forms for the standard ansatz families.

    ``layers`` is needed by hardware_efficient only; ``k`` by uccsd only.
    The noisy variant is returned when ``p`` is given.
    """
    _check_epsilon(epsilon)
    if not norm_o > 0:
        raise ValueError("norm_o must be positive")
    n = n_qubits
    if family == "hardware_efficient":
        if n < 1 or layers is None or layers < 1:
            raise ValueError("hardware_efficient needs n_qubits >= 1 and layers >= 1")
        m = n * layers
        ln, noise = 6 * m * math.log(21 * m * norm_o / epsilon), 4 * m
    elif family == "mps":
        if n < 2:
            raise ValueError("mps needs n_qubits >= 2")
        m = n + 2 * math.sqrt(n)
        ln, noise = 6 * m * math.log(21 * m * norm_o / epsilon), 4 * m
    elif family == "tree":
        if n < 2:
            raise ValueError("tree needs n_qubits >= 2")
        ln, noise = 10.5 * n * math.log(73.5 * n * norm_o / epsilon), 7 * n
    elif family == "uccsd":
        if n < 1 or k < 1 or d < 2:
            raise ValueError("uccsd needs n_qubits >= 1, k >= 1, d >= 2")
        m = n**5
        ln, noise = m * d ** (2 * k) * math.log(7 * m * norm_o / epsilon), m
    else:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if p is None:
        return LogBound(ln, f"{family}")
    return LogBound(ln + noise * _ln_1mp(p), f"{family}_depolarizing")


def ln_unitary_group_covering(d: int, k: int, epsilon: float) -> tuple[float, float]:
    """(lower, upper) on ln N(U(d^k), eps, operator norm)."""
    _check_epsilon(epsilon)
    if d < 2 or k < 1:
        raise ValueError("need d >= 2 and k >= 1")
    dim = d ** (2 * k)
    return dim * math.log(3 / (4 * epsilon)), dim * math.log(7 / epsilon)


def _check_sample(n, d, k, n_gt, norm_o):
    if n < 1:
        raise ValueError("n must be at least 1")
    if n_gt < 1:
        raise ValueError("n_gt must be at least 1")
    if d < 2 or k < 1 or not norm_o > 0:
        raise ValueError("need d >= 2, k >= 1, norm_o > 0")


def rademacher_bound(n: int, d: int, k: int, n_gt: int, norm_o: float) -> float:
    """4/sqrt(n) + 12/sqrt(n) d^k sqrt(N_gt) (ln(7 sqrt(n) N_gt ||O||) + 1)."""
    _check_sample(n, d, k, n_gt, norm_o)
    r = math.sqrt(n)
    return 4 / r + 12 / r * d**k * math.sqrt(n_gt) * (math.log(7 * r * n_gt * norm_o) + 1)


def dudley_integral(n: int, d: int, k: int, n_gt: int, norm_o: float, alpha: float | None = None) -> float:
    """4 alpha + 12/sqrt(n) * integral_alpha^1 sqrt(ln N(eps / sqrt(n))) d eps, by quadrature.

    Uses the ideal covering bound at scale eps / sqrt(n); alpha defaults to
    1/sqrt(n). Always at most :func:`rademacher_bound`, which replaces the
    square root of the log by the log itself and drops a negative term.
    """
    _check_sample(n, d, k, n_gt, norm_o)
    r = math.sqrt(n)
    alpha = 1 / r if alpha is None else alpha
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    dim = d ** (2 * k) * n_gt
    c = 7 * r * n_gt * norm_o

    def integrand(e):
        return math.sqrt(max(dim * math.log(c / e), 0.0))

    val, _ = quad(integrand, alpha, 1.0, limit=200)
    return 4 * alpha + 12 / r * val


def generalization_bound(n: int, d: int, k: int, n_gt: int, norm_o: float, l1: float, c1: float, delta: float) -> float:
    """8L1/sqrt(n) + 24L1/sqrt(n) d^k sqrt(N_gt)(ln(7 sqrt(n) N_gt ||O||) + 1) + 3C1 sqrt(ln(1/delta) / 2n)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    _check_sample(n, d, k, n_gt, norm_o)
    r = math.sqrt(n)
    return (8 * l1 / r
            + 24 * l1 / r * d**k * math.sqrt(n_gt) * (math.log(7 * r * n_gt * norm_o) + 1)
            + 3 * c1 * math.sqrt(math.log(1 / delta) / (2 * n)))


SRM_MODES = ("l2", "l0", "l2_plus_obsnorm")
L0_THRESHOLD = 1e-12


def srm_objective(empirical_risk: float, theta, lam: float, mode: str = "l2", norm_o: float | None = None) -> float:
    """Empirical risk plus a complexity penalty on the parameters."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    theta = np.asarray(theta, dtype=float)
    if mode == "l2":
        return float(empirical_risk + lam * np.linalg.norm(theta))
    if mode == "l0":
        return float(empirical_risk + lam * np.count_nonzero(np.abs(theta) > L0_THRESHOLD))
    if mode == "l2_plus_obsnorm":
        if norm_o is None:
            raise ValueError("l2_plus_obsnorm needs norm_o")
        return float(empirical_risk + lam * np.linalg.norm(theta) + norm_o)
    raise ValueError(f"unknown mode {mode!r}; expected one of {SRM_MODES}")


def gate_count_bounds(b: BoundInput) -> list[LogBound]:
    """The three count-based bounds for one input, in a fixed order."""
    return [ln_covering_ideal(b), ln_covering_depolarizing(b), ln_covering_noisy_general(b)]
