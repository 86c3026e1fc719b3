"""Parameterized circuits built from RX/RY/RZ rotations and CNOTs."""

from __future__ import annotations

import math
from dataclasses import dataclass

ROTATIONS = ("RX", "RY", "RZ")
KINDS = ROTATIONS + ("CNOT",)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    index: int | None = None  # trainable parameter index
    angle: float | None = None  # fixed angle in radians

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "CNOT":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("CNOT needs two distinct qubits")
            if self.index is not None or self.angle is not None:
                raise ValueError("CNOT carries no parameter")
        else:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on exactly one qubit")
            if (self.index is None) == (self.angle is None):
                raise ValueError("rotation needs exactly one of a trainable index or a fixed angle")

    @property
    def trainable(self) -> bool:
        return self.index is not None


def rot(kind: str, qubit: int, *, index: int | None = None, angle: float | None = None) -> Gate:
    return Gate(kind, (qubit,), index=index, angle=angle)


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


@dataclass(frozen=True)
class GateCounts:
    n_g: int
    n_gt: int
    k: int
    k_trainable: int


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    param_count: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        object.__setattr__(self, "gates", tuple(self.gates))
        used = set()
        for g in self.gates:
            if any(q < 0 or q >= self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} touches a qubit outside [0, {self.n_qubits})")
            if g.trainable:
                if not 0 <= g.index < self.param_count:
                    raise ValueError(f"trainable index {g.index} outside [0, {self.param_count})")
                used.add(g.index)
        if len(used) != self.param_count:
            missing = sorted(set(range(self.param_count)) - used)
            raise ValueError(f"parameters never used by a gate: {missing}")

    def __add__(self, other: Circuit) -> Circuit:
        """Run ``self`` then ``other``; the trainable indices of ``other`` are shifted."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        off = self.param_count
        shifted = [
            Gate(g.kind, g.qubits, index=g.index + off, angle=None) if g.trainable else g
            for g in other.gates
        ]
        return Circuit(self.n_qubits, self.gates + tuple(shifted), self.param_count + other.param_count)


def gate_counts(c: Circuit) -> GateCounts:
    n_gt = sum(g.trainable for g in c.gates)
    k = max((len(g.qubits) for g in c.gates), default=0)
    k_tr = max((len(g.qubits) for g in c.gates if g.trainable), default=0)
    return GateCounts(len(c.gates), n_gt, k, k_tr)


def _zyz(qubit: int, first_index: int) -> list[Gate]:
    return [
        rot("RZ", qubit, index=first_index),
        rot("RY", qubit, index=first_index + 1),
        rot("RZ", qubit, index=first_index + 2),
    ]


def ring_entangler(n_qubits: int) -> list[Gate]:
    """N CNOTs on the ring edges {q, q+1 mod N}, oriented so the last qubit is never a target.

    Order: (N-1 -> N-2), ..., (1 -> 0), then the wrap edge (N-1 -> 0). The QNN reads
    out the last qubit; a CNOT targeting it scrambles its reduced state so badly that
    a hidden concept of this shape almost never produces labels with a 0.2 margin.
    """
    n = n_qubits
    return [cnot(q + 1, q) for q in range(n - 2, -1, -1)] + [cnot(n - 1, 0)]


def build_hardware_efficient(n_qubits: int, layers: int) -> Circuit:
    """RZ-RY-RZ on every qubit, then :func:`ring_entangler`; repeated ``layers`` times."""
    if n_qubits < 2:
        raise ValueError("hardware-efficient ansatz needs at least 2 qubits")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    gates: list[Gate] = []
    p = 0
    for _ in range(layers):
        for q in range(n_qubits):
            gates += _zyz(q, p)
            p += 3
        gates += ring_entangler(n_qubits)
    return Circuit(n_qubits, gates, p)


ENCODING_QUBITS = 7


def build_encoding_circuit(x) -> Circuit:
    """Fixed circuit  Eng . RY(x)^(x)7 . Eng . RY(x)^(x)7  with Eng a CNOT chain (i, i+1)."""
    x = [float(v) for v in x]
    if len(x) != ENCODING_QUBITS:
        raise ValueError(f"expected {ENCODING_QUBITS} features, got {len(x)}")
    for v in x:
        if not 0.0 <= v < 2 * math.pi:
            raise ValueError(f"feature {v} outside [0, 2pi)")
    n = ENCODING_QUBITS
    layer = [rot("RY", q, angle=v) for q, v in enumerate(x)]
    eng = [cnot(q, q + 1) for q in range(n - 1)]
    # operator order U_Eng RY U_Eng RY: the rightmost factor acts first
    return Circuit(n, layer + eng + layer + eng, 0)


def build_mps_ansatz(n_qubits: int, block_width: int) -> Circuit:
    """Staircase of ceil(N / (M-1)) blocks of width M, each block overlapping the next by one qubit.

    A block is RZ-RY-RZ on each of its M qubits and a ring of M CNOTs over them.
    Blocks near the end are clipped to the register; a clipped block keeps
    its 3*M rotations and M CNOTs by cycling over the qubits it still owns,
    so the gate count stays 4*M per block.
    """
    if not 2 <= block_width < n_qubits:
        raise ValueError(f"block_width must satisfy 2 <= M < N, got M={block_width}, N={n_qubits}")
    m = block_width
    n_blocks = math.ceil(n_qubits / (m - 1))
    gates: list[Gate] = []
    p = 0
    for b in range(n_blocks):
        start = min((m - 1) * b, n_qubits - 2)
        span = list(range(start, min(start + m, n_qubits)))
        for j in range(m):
            gates += _zyz(span[j % len(span)], p)
            p += 3
        s = len(span)
        gates += [cnot(span[j % s], span[(j + 1) % s]) for j in range(m)]
    return Circuit(n_qubits, gates, p)


def build_tree_ansatz(n_qubits: int) -> Circuit:
    """Binary-tree network: level l holds N / 2**l two-qubit blocks, down to a final level of 2.

    Each block is RZ-RY-RZ on both of its qubits then one CNOT (7 gates).
    Level-l blocks pair up the surviving qubits at stride 2**(l-1).
    """
    if n_qubits < 4 or n_qubits & (n_qubits - 1):
        raise ValueError(f"tree ansatz needs a power-of-two size >= 4, got {n_qubits}")
    gates: list[Gate] = []
    p = 0
    stride = 1
    n_blocks = n_qubits // 2
    while n_blocks >= 2:
        for b in range(n_blocks):
            a, c = 2 * b * stride, 2 * b * stride + stride
            gates += _zyz(a, p) + _zyz(c, p + 3)
            p += 6
            gates.append(cnot(a, c))
        stride *= 2
        n_blocks //= 2
    return Circuit(n_qubits, gates, p)


VQE_KINDS = ("restricted", "modest", "overwhelming")

# The H2 ground state in this qubit encoding is a|1000> + b|0010>; reaching it from
# a product state needs a CNOT network mapping some basis flip onto qubits {0, 2}.
# A nearest-neighbour chain cannot, so the block entangles (0, 2) and (1, 3).
VQE_ENTANGLER = ((0, 2), (1, 3))


def _vqe_block(first_index: int) -> list[Gate]:
    gates: list[Gate] = []
    for q in range(4):
        gates += _zyz(q, first_index + 3 * q)
    return gates + [cnot(a, b) for a, b in VQE_ENTANGLER]


def build_vqe_ansatz(kind: str, n_qubits: int = 4) -> Circuit:
    if n_qubits != 4:
        raise ValueError("the VQE ansaetze are defined on 4 qubits")
    if kind == "restricted":
        return Circuit(4, [rot("RY", 0, index=0)], 1)
    if kind == "modest":
        return Circuit(4, _vqe_block(0), 12)
    if kind == "overwhelming":
        return build_vqe_layers(4)
    raise ValueError(f"unknown VQE ansatz kind {kind!r}; expected one of {VQE_KINDS}")


def build_vqe_layers(n_layers: int) -> Circuit:
    """The modest 4-qubit block repeated ``n_layers`` times (12 parameters each)."""
    if n_layers < 1:
        raise ValueError("n_layers must be positive")
    gates: list[Gate] = []
    for rep in range(n_layers):
        gates += _vqe_block(12 * rep)
    return Circuit(4, gates, 12 * n_layers)


def to_text(c: Circuit) -> str:
    """Serialize one gate per line: ``KIND q0[,q1] [t<index>|f<angle>]``.

    A header line ``# n_qubits=<N> param_count=<P>`` comes first.
    """
    lines = [f"# n_qubits={c.n_qubits} param_count={c.param_count}"]
    for g in c.gates:
        qs = ",".join(str(q) for q in g.qubits)
        if g.kind == "CNOT":
            lines.append(f"CNOT {qs}")
        elif g.trainable:
            lines.append(f"{g.kind} {qs} t{g.index}")
        else:
            lines.append(f"{g.kind} {qs} f{g.angle!r}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    n_qubits = param_count = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = dict(f.split("=", 1) for f in line[1:].split() if "=" in f)
            if "n_qubits" in fields:
                n_qubits = int(fields["n_qubits"])
            if "param_count" in fields:
                param_count = int(fields["param_count"])
            continue
        parts = line.split()
        try:
            kind, qs = parts[0].upper(), tuple(int(q) for q in parts[1].split(","))
            if kind == "CNOT":
                if len(parts) != 2:
                    raise ValueError("CNOT takes no parameter")
                gates.append(Gate(kind, qs))
            else:
                if len(parts) != 3 or parts[2][0] not in "tf":
                    raise ValueError("rotation needs t<index> or f<angle>")
                tag, val = parts[2][0], parts[2][1:]
                if tag == "t":
                    gates.append(Gate(kind, qs, index=int(val)))
                else:
                    gates.append(Gate(kind, qs, angle=float(val)))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}: {exc}") from None
    if n_qubits is None:
        n_qubits = 1 + max((q for g in gates for q in g.qubits), default=0)
    if param_count is None:
        param_count = 1 + max((g.index for g in gates if g.trainable), default=-1)
    return Circuit(n_qubits, gates, param_count)
