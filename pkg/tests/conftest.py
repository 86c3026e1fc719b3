import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vqalab.circuits import Circuit, cnot, rot
from vqalab.linalg import PauliTerm, build_observable

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_circuit(rng, n_qubits, n_gates, n_params=None, p_fixed=0.2):
    """Random circuit over RX/RY/RZ/CNOT; every parameter index is used at least once."""
    n_params = n_params if n_params is not None else max(1, n_gates // 2)
    kinds = ["RX", "RY", "RZ"] + (["CNOT"] if n_qubits > 1 else [])
    gates = [rot(rng.choice(["RX", "RY", "RZ"]), int(rng.integers(n_qubits)), index=j) for j in range(n_params)]
    for _ in range(max(0, n_gates - n_params)):
        kind = rng.choice(kinds)
        if kind == "CNOT":
            a, b = rng.choice(n_qubits, 2, replace=False)
            gates.append(cnot(int(a), int(b)))
        elif rng.random() < p_fixed:
            gates.append(rot(kind, int(rng.integers(n_qubits)), angle=float(rng.uniform(-4, 4))))
        else:
            gates.append(rot(kind, int(rng.integers(n_qubits)), index=int(rng.integers(n_params))))
    order = rng.permutation(len(gates))
    return Circuit(n_qubits, [gates[i] for i in order], n_params)


def random_observable(rng, n_qubits, n_terms=4):
    terms = []
    for _ in range(n_terms):
        qs = rng.choice(n_qubits, int(rng.integers(1, n_qubits + 1)), replace=False)
        terms.append(PauliTerm(float(rng.normal()), tuple((int(q), str(rng.choice(list("XYZ")))) for q in qs)))
    return build_observable(terms, n_qubits)


def random_state(rng, n_qubits):
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return v / np.linalg.norm(v)


def dense_unitary(c, params):
    """Full 2^N x 2^N unitary built from Kronecker products, as an independent oracle."""
    from vqalab.linalg import PAULI

    n = c.n_qubits
    params = np.asarray(params, dtype=float)
    u = np.eye(2**n, dtype=complex)
    for g in c.gates:
        if g.kind == "CNOT":
            a, b = g.qubits
            p0 = np.diag([1, 0]).astype(complex)
            p1 = np.diag([0, 1]).astype(complex)
            f0 = [np.eye(2)] * n
            f1 = [np.eye(2)] * n
            f0 = f0[:a] + [p0] + f0[a + 1:]
            f1 = f1[:a] + [p1] + f1[a + 1:]
            f1 = f1[:b] + [PAULI["X"]] + f1[b + 1:]
            m = _kron_all(f0) + _kron_all(f1)
        else:
            theta = params[g.index] if g.trainable else g.angle
            p = PAULI[g.kind[1]]
            one = np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * p
            m = _kron_all([np.eye(2)] * g.qubits[0] + [one] + [np.eye(2)] * (n - g.qubits[0] - 1))
        u = m @ u
    return u


def _kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def check(number: int, title: str, checks: dict, detail: str = ""):
        ok = all(bool(v) for v in checks.values())
        failed = [k for k, v in checks.items() if not v]
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        if failed:
            line += "  failed: " + "; ".join(failed)
        request.config.stash.setdefault(ACCEPTANCE, {})[number] = line
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
