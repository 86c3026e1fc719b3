"""Experiment drivers: each returns a plot-ready table, and ``run`` writes CSV + manifest."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundInput, gate_count_bounds, ln_covering_ansatz_family
from .circuits import (
    VQE_KINDS, Circuit, build_hardware_efficient, build_mps_ansatz, build_tree_ansatz, build_vqe_ansatz,
    build_vqe_layers, gate_counts,
)
from .data import ENCODING_QUBITS, encode_states, generate_dataset, load_h2_table, qnn_observable
from .linalg import extreme_eigenvalues, operator_norm
from .optimize import ADAM_VARIANTS, AdamConfig, SgdConfig, train_qnn, train_vqe

EXPERIMENTS = ("qnn_layers", "qnn_noise", "vqe_three_ansatze", "vqe_adam_depths", "scaling_fit", "bounds_table")

DEFAULT_LAYERS = {
    "qnn_layers": (1, 2, 3, 4, 5),
    "qnn_noise": (2,),
    "vqe_adam_depths": (5, 10, 15, 20),
    "scaling_fit": tuple(range(1, 16)),
    "bounds_table": tuple(range(1, 16)),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    out_dir: str = "results"
    workers: int = 1
    layers: tuple[int, ...] | None = None  # None: the experiment's default sweep
    # QNN
    data_seed: int = 1
    n_examples: int = 400
    train_size: int = 60
    margin: float = 0.2
    epochs: int = 20
    learning_rate: float = 0.2
    batch_size: int = 4
    noise_p: tuple[float, ...] = (0.1, 0.5, 0.9)
    gap_metric: str = "accuracy"  # or "loss"
    # VQE
    vqe_learning_rate: float = 0.4
    vqe_iterations: int = 300
    vqe_tolerance: float = 1e-6
    adam_variant: str = "standard"
    adam_eta0: float = 0.4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    adam_epsilon: float = 1e-6
    adam_iterations: int = 81
    adam_tolerance: float = 1e-6
    adam_bond_length: float = 0.3
    # bounds
    epsilon: float = 0.05
    bounds_p: float = 0.1
    family_qubits: int = 8
    mps_block_width: int = 3
    uccsd_qubits: int = 4
    vqe_bond_length: float = 0.74

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if self.layers is not None:
            object.__setattr__(self, "layers", tuple(int(v) for v in self.layers))
            if not self.layers or min(self.layers) < 1:
                raise ValueError("layers must be positive integers")
        object.__setattr__(self, "noise_p", tuple(float(v) for v in self.noise_p))
        if any(not 0.0 <= p <= 1.0 for p in self.noise_p):
            raise ValueError("noise_p values must lie in [0, 1]")
        if self.gap_metric not in ("accuracy", "loss"):
            raise ValueError("gap_metric must be 'accuracy' or 'loss'")
        if self.adam_variant not in ADAM_VARIANTS:
            raise ValueError(f"adam_variant must be one of {ADAM_VARIANTS}")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @property
    def layer_sweep(self) -> tuple[int, ...]:
        return self.layers if self.layers is not None else DEFAULT_LAYERS.get(self.experiment, ())

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        d = dict(d)
        for key in ("seeds", "layers", "noise_p"):
            if isinstance(d.get(key), list):
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        d = json.loads(text)
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["layers"] = list(self.layer_sweep)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


@dataclass
class Table:
    name: str
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name: str) -> list:
        j = self.header.index(name)
        return [r[j] for r in self.rows]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _pool_map(fn, tasks: list, workers: int) -> list:
    """Map over tasks in order; with ``workers > 1`` the tasks run in separate processes."""
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
        return list(ex.map(fn, tasks))


def _mean_var(values) -> tuple[float, float]:
    a = np.asarray(values, dtype=float)
    return float(a.mean()), float(a.var())


# ------------------------------------------------------------------- QNN


@lru_cache(maxsize=4)
def _qnn_data(data_seed: int, n: int, margin: float, train_size: int):
    ds = generate_dataset(data_seed, n=n, delta=margin, train_size=train_size)
    return ds, encode_states(ds.x)


def _qnn_task(task):
    cfg, n_layers, seed, p = task
    ds, states = _qnn_data(cfg.data_seed, cfg.n_examples, cfg.margin, cfg.train_size)
    sgd = SgdConfig(learning_rate=cfg.learning_rate, batch_size=cfg.batch_size, epochs=cfg.epochs, seed=seed)
    ansatz = build_hardware_efficient(ENCODING_QUBITS, n_layers)
    return train_qnn(ds, ansatz, qnn_observable(), sgd, noise_p=p, states=states)


QNN_CURVE_HEADER = [
    "epoch", "train_acc_mean", "train_acc_var", "test_acc_mean", "test_acc_var",
    "train_loss_mean", "test_loss_mean",
]


def _curve_rows(key: list, traces) -> list[list]:
    rows = []
    for e in range(len(traces[0].train_acc)):
        tr = _mean_var([t.train_acc[e] for t in traces])
        te = _mean_var([t.test_acc[e] for t in traces])
        rows.append(key + [e, tr[0], tr[1], te[0], te[1],
                           float(np.mean([t.losses[e] for t in traces])),
                           float(np.mean([t.test_losses[e] for t in traces]))])
    return rows


def _qnn_traces(cfg: ExperimentConfig, layers, ps) -> dict:
    tasks = sorted((L, s, p) for L in layers for s in cfg.seeds for p in ps)
    out = _pool_map(_qnn_task, [(cfg, L, s, p) for L, s, p in tasks], cfg.workers)
    return dict(zip(tasks, out))


def run_qnn_layers(cfg: ExperimentConfig) -> Table:
    """Per-epoch seed mean and variance of accuracy for each depth L."""
    layers = cfg.layer_sweep
    traces = _qnn_traces(cfg, layers, [None])
    t = Table("qnn_layers", ["layers"] + QNN_CURVE_HEADER)
    for L in layers:
        t.rows += _curve_rows([L], [traces[(L, s, None)] for s in sorted(cfg.seeds)])
    return t


def run_qnn_noise(cfg: ExperimentConfig) -> Table:
    """Accuracy curves of the noisy QNN for each depolarizing rate."""
    layers = cfg.layer_sweep
    traces = _qnn_traces(cfg, layers, list(cfg.noise_p))
    t = Table("qnn_noise", ["layers", "p"] + QNN_CURVE_HEADER)
    for L in layers:
        for p in sorted(cfg.noise_p):
            t.rows += _curve_rows([L, p], [traces[(L, s, p)] for s in sorted(cfg.seeds)])
    return t


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    r_squared: float  # NaN when the responses have zero variance

    def __post_init__(self):
        if not (math.isnan(self.r_squared) or self.r_squared <= 1.0 + 1e-12):
            raise ValueError("r_squared cannot exceed 1")


def fit_sqrt(n_gt, gap) -> FitResult:
    """Least-squares fit gap ~ a * sqrt(n_gt) + b with R^2 = 1 - SS_res / SS_tot."""
    x = np.sqrt(np.asarray(n_gt, dtype=float))
    y = np.asarray(gap, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need at least two matching points")
    design = np.column_stack([x, np.ones_like(x)])
    (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    ss_res = float(np.sum((y - design @ np.array([a, b])) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = float("nan") if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(float(a), float(b), r2)


def _gap(trace, metric: str) -> float:
    if metric == "accuracy":
        return trace.train_acc[-1] - trace.test_acc[-1]
    return trace.test_losses[-1] - trace.losses[-1]


def run_scaling_fit(cfg: ExperimentConfig) -> tuple[FitResult, Table]:
    """Generalization gap per depth, fitted against sqrt(N_gt) over the seed means."""
    layers = cfg.layer_sweep
    traces = _qnn_traces(cfg, layers, [None])
    t = Table("scaling_fit", ["layers", "n_gt", "sqrt_n_gt", "gap_mean", "gap_var",
                              "train_acc_mean", "test_acc_mean", "train_loss_mean", "test_loss_mean"])
    for L in layers:
        runs = [traces[(L, s, None)] for s in sorted(cfg.seeds)]
        n_gt = gate_counts(build_hardware_efficient(ENCODING_QUBITS, L)).n_gt
        g = _mean_var([_gap(r, cfg.gap_metric) for r in runs])
        t.rows.append([L, n_gt, math.sqrt(n_gt), g[0], g[1],
                       float(np.mean([r.train_acc[-1] for r in runs])),
                       float(np.mean([r.test_acc[-1] for r in runs])),
                       float(np.mean([r.losses[-1] for r in runs])),
                       float(np.mean([r.test_losses[-1] for r in runs]))])
    fit = fit_sqrt(t.column("n_gt"), t.column("gap_mean"))
    return fit, t


# ------------------------------------------------------------------- VQE


def _h2_rows(lo: float = 0.3, hi: float = 2.1):
    return [p for p in load_h2_table() if lo - 1e-9 <= p.bond_length <= hi + 1e-9]


def _h2_at(bond_length: float):
    for p in load_h2_table():
        if abs(p.bond_length - bond_length) < 1e-9:
            return p
    raise ValueError(f"no H2 row at bond length {bond_length}")


def _vqe_sgd_task(task):
    cfg, kind, bond, seed = task
    sgd = SgdConfig(learning_rate=cfg.vqe_learning_rate, epochs=cfg.vqe_iterations,
                    tolerance=cfg.vqe_tolerance, seed=seed)
    return train_vqe(_h2_at(bond).observable, build_vqe_ansatz(kind), sgd).losses[-1]



def run_vqe_three_ansatze(cfg: ExperimentConfig) -> Table:
    """Final SGD energy per ansatz and bond length, next to exact diagonalization."""
    rows = _h2_rows()
    tasks = sorted((p.bond_length, kind, s) for p in rows for kind in VQE_KINDS for s in cfg.seeds)
    energies = dict(zip(tasks, _pool_map(_vqe_sgd_task, [(cfg, k, b, s) for b, k, s in tasks], cfg.workers)))
    header = ["bond_length", "exact_energy"]
    for kind in VQE_KINDS:
        header += [f"{kind}_mean", f"{kind}_var"]
    t = Table("vqe_three_ansatze", header + ["overwhelming_minus_modest"])
    for p in rows:
        row = [p.bond_length, extreme_eigenvalues(p.observable.dense)[0]]
        means = {}
        for kind in VQE_KINDS:
            means[kind], var = _mean_var([energies[(p.bond_length, kind, s)] for s in cfg.seeds])
            row += [means[kind], var]
        t.rows.append(row + [means["overwhelming"] - means["modest"]])
    return t


def _adam_task(task):
    cfg, n_layers, seed = task
    adam = AdamConfig(eta0=cfg.adam_eta0, beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, epsilon=cfg.adam_epsilon,
                      max_iterations=cfg.adam_iterations, tolerance=cfg.adam_tolerance,
                      variant=cfg.adam_variant, seed=seed)
    return train_vqe(_h2_at(cfg.adam_bond_length).observable, build_vqe_layers(n_layers), adam)


def run_vqe_adam_depths(cfg: ExperimentConfig) -> Table:
    """Adam energy traces and |dE| between neighbouring iterations, one row per (L, seed, t)."""
    layers = cfg.layer_sweep
    tasks = sorted((L, s) for L in layers for s in cfg.seeds)
    traces = dict(zip(tasks, _pool_map(_adam_task, [(cfg, L, s) for L, s in tasks], cfg.workers)))
    t = Table("vqe_adam_depths", ["layers", "seed", "iteration", "energy", "abs_delta", "converged"])
    for L, s in tasks:
        tr = traces[(L, s)]
        for i, e in enumerate(tr.losses):
            delta = abs(e - tr.losses[i - 1]) if i else None
            t.rows.append([L, s, i, e, delta, tr.converged_step is not None and i == tr.converged_step])
    return t


# ---------------------------------------------------------------- bounds


BOUNDS_HEADER = ["circuit", "formula", "n_qubits", "layers", "n_g", "n_gt", "k", "norm_o",
                 "ln_ideal", "ln_depolarizing", "ln_general_noise"]


def _count_rows(name: str, c: Circuit | None, layers, norm_o: float, cfg: ExperimentConfig,
                counts: tuple[int, int, int] | None = None) -> list:
    if counts is None:
        gc = gate_counts(c)
        counts = (gc.n_g, gc.n_gt, gc.k_trainable)
    n_g, n_gt, k = counts
    n_qubits = c.n_qubits if c is not None else cfg.uccsd_qubits
    b = BoundInput(n_gt=n_gt, n_g=n_g, k=k, norm_o=norm_o, epsilon=cfg.epsilon, p=cfg.bounds_p)
    ideal, depol, general = (x.ln_value for x in gate_count_bounds(b))
    return [name, "gate_count", n_qubits, layers, n_g, n_gt, k, norm_o, ideal, depol, general]


def _family_row(name: str, family: str | None, n_qubits: int, layers, norm_o: float, cfg: ExperimentConfig) -> list:
    if family is None:
        return [name, "family", n_qubits, layers, None, None, None, norm_o, None, None, None]
    kw = {"layers": layers} if family == "hardware_efficient" else {}
    ideal = ln_covering_ansatz_family(family, n_qubits, norm_o, cfg.epsilon, **kw).ln_value
    depol = ln_covering_ansatz_family(family, n_qubits, norm_o, cfg.epsilon, p=cfg.bounds_p, **kw).ln_value
    k = 1 if family == "uccsd" else None  # the other closed forms fix k internally
    return [name, "family", n_qubits, layers, None, None, k, norm_o, ideal, depol, None]


def run_bounds_table(cfg: ExperimentConfig) -> Table:
    """Count-based and family closed-form ln-bounds for every experiment circuit."""
    t = Table("bounds_table", BOUNDS_HEADER)
    qnn_norm = operator_norm(qnn_observable().dense)
    for L in cfg.layer_sweep:
        c = build_hardware_efficient(ENCODING_QUBITS, L)
        t.rows.append(_count_rows(f"qnn_hea_L{L}", c, L, qnn_norm, cfg))
        t.rows.append(_family_row(f"qnn_hea_L{L}", "hardware_efficient", ENCODING_QUBITS, L, qnn_norm, cfg))
    h_norm = operator_norm(_h2_at(cfg.vqe_bond_length).observable.dense)
    for kind in VQE_KINDS:
        c = build_vqe_ansatz(kind)
        t.rows.append(_count_rows(f"vqe_{kind}", c, None, h_norm, cfg))
        t.rows.append(_family_row(f"vqe_{kind}", None, 4, None, h_norm, cfg))
    n = cfg.family_qubits
    mps = build_mps_ansatz(n, cfg.mps_block_width)
    t.rows.append(_count_rows(f"mps_N{n}", mps, None, 1.0, cfg))
    t.rows.append(_family_row(f"mps_N{n}", "mps", n, None, 1.0, cfg))
    tree = build_tree_ansatz(n)
    t.rows.append(_count_rows(f"tree_N{n}", tree, None, 1.0, cfg))
    t.rows.append(_family_row(f"tree_N{n}", "tree", n, None, 1.0, cfg))
    u = cfg.uccsd_qubits
    t.rows.append(_count_rows(f"uccsd_N{u}", None, None, h_norm, cfg, counts=(u**5, u**5, 1)))
    t.rows.append(_family_row(f"uccsd_N{u}", "uccsd", u, None, h_norm, cfg))
    return t


# ---------------------------------------------------------------- driver


def run_tables(cfg: ExperimentConfig) -> tuple[list[Table], dict]:
    """Run the configured experiment; returns its tables and extra manifest entries."""
    if cfg.experiment == "qnn_layers":
        return [run_qnn_layers(cfg)], {}
    if cfg.experiment == "qnn_noise":
        return [run_qnn_noise(cfg)], {}
    if cfg.experiment == "vqe_three_ansatze":
        return [run_vqe_three_ansatze(cfg)], {}
    if cfg.experiment == "vqe_adam_depths":
        return [run_vqe_adam_depths(cfg)], {}
    if cfg.experiment == "scaling_fit":
        fit, t = run_scaling_fit(cfg)
        summary = Table("scaling_fit_summary", ["a", "b", "r_squared", "gap_metric"],
                        [[fit.a, fit.b, fit.r_squared, cfg.gap_metric]])
        r2 = None if math.isnan(fit.r_squared) else fit.r_squared
        return [t, summary], {"fit": {"a": fit.a, "b": fit.b, "r_squared": r2}}
    return [run_bounds_table(cfg)], {}


def run(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None, timestamp: str | None = None) -> list[Path]:
    """Run and write ``<name>_<timestamp>.csv`` files plus ``manifest.json``; returns the CSV paths."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = timestamp or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    tables, extra = run_tables(cfg)
    paths = []
    for t in tables:
        path = out / f"{t.name}_{stamp}.csv"
        path.write_text(t.to_csv(), encoding="utf-8")
        paths.append(path)
    manifest = {
        "experiment": cfg.experiment,
        "timestamp": stamp,
        "version": __version__,
        "config": cfg.to_dict(),
        "seeds": list(cfg.seeds),
        "files": [p.name for p in paths],
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return paths
