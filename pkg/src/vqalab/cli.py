"""Command-line entry point: ``vqalab <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bounds import BoundInput, gate_count_bounds
from .circuits import (
    VQE_KINDS, build_hardware_efficient, build_mps_ansatz, build_tree_ansatz, build_vqe_ansatz,
    from_text, gate_counts, to_text,
)
from .data import generate_dataset
from .experiments import EXPERIMENTS, ExperimentConfig, run

ADAM_ALIASES = {"standard": "standard", "paper": "paper_literal", "paper_literal": "paper_literal"}


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _experiment_config(args) -> ExperimentConfig:
    d = {}
    if args.config:
        d = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        if d.get("experiment", args.command) != args.command:
            raise ValueError(f"config is for {d['experiment']!r}, not {args.command!r}")
    d["experiment"] = args.command
    if args.out:
        d["out_dir"] = args.out
    if args.seeds:
        d["seeds"] = args.seeds
    if args.noise_p:
        d["noise_p"] = args.noise_p
    if args.adam_variant:
        d["adam_variant"] = ADAM_ALIASES[args.adam_variant]
    if args.layers:
        d["layers"] = args.layers
    if args.workers:
        d["workers"] = args.workers
    return ExperimentConfig.from_dict(d)


def _cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    for path in run(cfg):
        print(path)
    return 0


def _cmd_bounds(args) -> int:
    if args.circuit:
        gc = gate_counts(from_text(Path(args.circuit).read_text(encoding="utf-8")))
        n_g, n_gt, k = gc.n_g, gc.n_gt, gc.k_trainable
    else:
        if args.n_gt is None:
            raise ValueError("give --n-gt (and optionally --n-g, --k) or --circuit")
        n_gt = args.n_gt
        n_g = args.n_g if args.n_g is not None else n_gt
        k = args.k
    b = BoundInput(n_gt=n_gt, n_g=n_g, d=args.d, k=k, norm_o=args.norm_o, epsilon=args.epsilon,
                   p=args.p, allow_any_epsilon=args.allow_any_epsilon)
    print(f"n_g={b.n_g} n_gt={b.n_gt} d={b.d} k={b.k} norm_o={b.norm_o} epsilon={b.epsilon} p={b.p}")
    print(f"{'formula':<16}{'ln_bound':>24}")
    for lb in gate_count_bounds(b):
        print(f"{lb.formula_id:<16}{lb.ln_value:>24.12g}")
    return 0


def _cmd_circuit(args) -> int:
    if args.kind == "hardware_efficient":
        c = build_hardware_efficient(args.qubits, args.layers)
    elif args.kind == "mps":
        c = build_mps_ansatz(args.qubits, args.block_width)
    elif args.kind == "tree":
        c = build_tree_ansatz(args.qubits)
    else:
        c = build_vqe_ansatz(args.kind.removeprefix("vqe_"))
    sys.stdout.write(to_text(c))
    return 0


def _cmd_dataset(args) -> int:
    text = generate_dataset(args.seed).to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqalab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seeds", type=_int_list, help="comma-separated seeds, e.g. 1,2,3,4,5")
        p.add_argument("--noise-p", type=_float_list, help="comma-separated depolarizing rates")
        p.add_argument("--adam-variant", choices=sorted(ADAM_ALIASES))
        p.add_argument("--layers", type=_int_list, help="comma-separated depths")
        p.add_argument("--workers", type=int, help="worker processes")
        p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("bounds", help="print ln covering bounds for raw counts or a circuit file")
    p.add_argument("--circuit", help="circuit text file (as written by `vqalab circuit`)")
    p.add_argument("--n-gt", type=int)
    p.add_argument("--n-g", type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--norm-o", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--allow-any-epsilon", action="store_true")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("circuit", help="print a circuit in text form")
    p.add_argument("kind", choices=["hardware_efficient", "mps", "tree"] + [f"vqe_{k}" for k in VQE_KINDS])
    p.add_argument("--qubits", type=int, default=7)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--block-width", type=int, default=3)
    p.set_defaults(func=_cmd_circuit)

    p = sub.add_parser("dataset", help="export the synthetic QNN data set as CSV")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_dataset)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"vqalab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
