"""Command-line interface.

Subcommands: ``gen`` (instance generation), ``run`` (single mechanism
execution), ``audit`` (truthfulness suite), ``bench`` (welfare experiment),
``psi`` (packer quality measurement), ``oracle`` (exact solve).  Exit code 0
on success, 1 on an acceptance violation (a truthfulness violation, a missed
welfare floor, a psi ratio below the requested minimum), 2 on input errors.

All outputs are pure functions of the arguments; rerunning a seeded command
rewrites byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..mechanism import run_mechanism
from ..model import InputError
from ..oracle import (
    DEFAULT_BIDDER_LIMIT,
    DEFAULT_CHANNEL_LIMIT,
    brute_force_max_cardinality,
    brute_force_max_welfare,
    oracle_packer,
)
from ..packing import (
    CONFLICT_PACKER,
    FIXED_POWER_PACKER,
    PC_PACKER,
    Packer,
    SECONDARY_PACKER,
    extended_packer,
)
from ..serialize import dumps_instance, dumps_outcome, load_instance, outcome_to_dict
from .audit import audit_truthfulness
from .experiments import measure_psi, welfare_experiment
from .generators import InstanceSpec, generate_instance, generate_values

_BASE_PACKERS = {
    "pc": PC_PACKER,
    "conflict": CONFLICT_PACKER,
    "fixed-power": FIXED_POWER_PACKER,
    "secondary": SECONDARY_PACKER,
}


def packer_from_name(name: str, oracle_limit: int = DEFAULT_BIDDER_LIMIT) -> Packer:
    """Resolve ``pc | conflict | fixed-power | secondary | oracle | extend:<sub>``."""
    if name in _BASE_PACKERS:
        return _BASE_PACKERS[name]
    if name == "oracle":
        return oracle_packer(limit=oracle_limit)
    if name.startswith("extend:"):
        return extended_packer(packer_from_name(name[len("extend:") :], oracle_limit))
    raise InputError(f"unknown packer {name!r}")


def _values_for(args, n: int) -> tuple[float, ...]:
    if args.values is not None:
        try:
            values = tuple(float(v) for v in args.values.split(","))
        except ValueError as exc:
            raise InputError(f"cannot parse --values: {exc}") from exc
        if len(values) != n:
            raise InputError(f"--values has {len(values)} entries, instance has {n}")
        if any(v < 0 for v in values):
            raise InputError("values must be nonnegative")
        return values
    values_seed = args.values_seed if args.values_seed is not None else args.seed
    return generate_values(n, values_seed)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _csv(rows: list[list[object]]) -> str:
    return "".join(",".join(_cell(v) for v in row) + "\n" for row in rows)


def _cell(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt(value: object) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _cmd_gen(args) -> int:
    spec = InstanceSpec(
        environment=args.env,
        n=args.n,
        channels=args.channels,
        alpha=args.alpha,
        beta=args.beta,
        noise=args.noise,
        area=args.area,
        length_low=args.length_low,
        length_high=args.length_high,
        density=args.density,
        scheme=args.scheme,
        base_power=args.base_power,
        grid=args.grid,
        edge_keep=args.edge_keep,
    )
    instance = generate_instance(spec, args.seed)
    text = dumps_instance(instance)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_run(args) -> int:
    instance = load_instance(args.instance)
    packer = packer_from_name(args.packer, args.oracle_limit)
    values = _values_for(args, instance.n)
    outcome = run_mechanism(instance, values, args.epsilon, packer, seed=args.seed)
    text = dumps_outcome(outcome)
    sys.stdout.write(text)
    if args.out:
        _write(Path(args.out), text)
    return 0


def _cmd_audit(args) -> int:
    instance = load_instance(args.instance)
    packer = packer_from_name(args.packer, args.oracle_limit)
    values = _values_for(args, instance.n)
    report = audit_truthfulness(
        instance,
        values,
        args.epsilon,
        packer,
        tapes=args.tapes,
        deviations=args.deviations,
        seed=args.seed,
    )
    rows: list[list[object]] = [
        ["tape_seed", "bidder", "deviation", "truthful_utility", "deviant_utility", "gain"]
    ]
    for v in report.violations:
        rows.append(
            [v.tape_seed, v.bidder, v.deviation, v.truthful_utility, v.deviant_utility, v.gain]
        )
    summary = (
        f"truthfulness audit\n"
        f"instance: {args.instance}\n"
        f"packer: {args.packer}  epsilon: {_fmt(args.epsilon)}  seed: {args.seed}\n"
        f"tapes: {args.tapes}  deviations per bidder: >= {args.deviations}\n"
        f"examined: {report.examined}\n"
        f"violations: {len(report.violations)}\n"
        f"max gain: {_fmt(report.max_gain)}\n"
        f"result: {'PASS' if report.ok else 'FAIL'}\n"
    )
    if args.out:
        _write(Path(args.out + ".csv"), _csv(rows))
        _write(Path(args.out + ".summary.txt"), summary)
    sys.stdout.write(summary)
    return 0 if report.ok else 1


def _cmd_bench(args) -> int:
    instance = load_instance(args.instance)
    packer = packer_from_name(args.packer, args.oracle_limit)
    values = _values_for(args, instance.n)
    stats = welfare_experiment(
        instance,
        values,
        args.epsilon,
        packer,
        trials=args.trials,
        seed=args.seed,
        oracle=args.oracle,
        oracle_limit=args.oracle_limit,
    )
    rows: list[list[object]] = [
        ["trial", "tape_seed", "secprice", "price", "welfare", "revenue"]
    ]
    for r in stats.records:
        rows.append([r.index, r.tape_seed, int(r.secprice), r.price, r.welfare, r.revenue])
    summary = (
        f"welfare experiment\n"
        f"instance: {args.instance}\n"
        f"packer: {args.packer}  epsilon: {_fmt(args.epsilon)}  seed: {args.seed}\n"
        f"trials: {stats.trials}\n"
        f"mean welfare: {_fmt(stats.mean_welfare)} "
        f"(+/- {_fmt(3.0 * stats.stderr_welfare)} at 3 standard errors)\n"
        f"mean revenue: {_fmt(stats.mean_revenue)} "
        f"(+/- {_fmt(3.0 * stats.stderr_revenue)} at 3 standard errors)\n"
        f"optimal welfare: {_fmt(stats.optimum)}\n"
        f"mean/optimal ratio: {_fmt(stats.welfare_ratio)}\n"
        f"theoretical floor factor: {_fmt(stats.floor_factor)}\n"
        f"theoretical floor value: {_fmt(stats.floor_value)}\n"
        f"floor satisfied: {_fmt(stats.floor_satisfied)}\n"
    )
    if args.out:
        _write(Path(args.out + ".csv"), _csv(rows))
        _write(Path(args.out + ".summary.txt"), summary)
        if args.plot:
            _plot_welfare(stats, Path(args.out + ".svg"))
    sys.stdout.write(summary)
    if stats.floor_satisfied is False:
        return 1
    return 0


def _plot_welfare(stats, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "specauction"
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist([r.welfare for r in stats.records], bins=40, color="#2a6f97")
    ax.axvline(stats.mean_welfare, color="#d1495b", label="mean welfare")
    if stats.floor_value is not None:
        ax.axvline(stats.floor_value, color="#30638e", linestyle="--", label="floor")
    ax.set_xlabel("welfare per trial")
    ax.set_ylabel("trials")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _cmd_psi(args) -> int:
    packer = packer_from_name(args.packer, args.oracle_limit)
    instances = [load_instance(path) for path in args.instance]
    report = measure_psi(packer, instances, oracle_limit=args.oracle_limit)
    rows: list[list[object]] = [["instance", "packed", "optimum", "ratio"]]
    for row, path in zip(report.rows, args.instance):
        rows.append([path, row.packed, row.optimum, row.ratio])
    summary = (
        f"packing quality\n"
        f"packer: {args.packer}\n"
        f"instances: {len(report.rows)}\n"
        f"min ratio: {_fmt(report.min_ratio)}\n"
        f"mean ratio: {_fmt(report.mean_ratio)}\n"
    )
    if args.out:
        _write(Path(args.out + ".csv"), _csv(rows))
        _write(Path(args.out + ".summary.txt"), summary)
    sys.stdout.write(summary)
    if args.min_ratio is not None and report.min_ratio < args.min_ratio:
        return 1
    return 0


def _cmd_oracle(args) -> int:
    instance = load_instance(args.instance)
    if args.cardinality:
        result = brute_force_max_cardinality(
            instance, None, args.limit, args.channel_limit
        )
    else:
        values = _values_for(args, instance.n)
        result = brute_force_max_welfare(instance, values, args.limit, args.channel_limit)
    doc = {
        "best_value": result.best_value,
        "explored": result.explored,
        "winners": sorted(result.witness.winners),
        "channel_winners": [sorted(g) for g in result.witness.channel_winners],
    }
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def _add_common(sub: argparse.ArgumentParser, *, values: bool = True) -> None:
    sub.add_argument("--seed", type=int, required=True, help="64-bit master seed")
    if values:
        sub.add_argument("--values", type=str, default=None, help="comma-separated valuations")
        sub.add_argument(
            "--values-seed", type=int, default=None, help="seed for generated valuations"
        )
    sub.add_argument(
        "--oracle-limit",
        type=int,
        default=DEFAULT_BIDDER_LIMIT,
        help="bidder cap for oracle-backed packers",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specauction",
        description="Universally truthful secondary spectrum auctions at desk scale.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="generate a seeded instance")
    gen.add_argument("--env", required=True, help="pc | fixed-power | conflict | secondary")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--channels", type=int, default=1)
    gen.add_argument("--alpha", type=float, default=2.5)
    gen.add_argument("--beta", type=float, default=1.5)
    gen.add_argument("--noise", type=float, default=1.0)
    gen.add_argument("--area", type=float, default=100.0)
    gen.add_argument("--length-low", type=float, default=1.0)
    gen.add_argument("--length-high", type=float, default=4.0)
    gen.add_argument("--density", type=float, default=0.3)
    gen.add_argument("--scheme", default="uniform")
    gen.add_argument("--base-power", type=float, default=None)
    gen.add_argument("--grid", type=int, default=3)
    gen.add_argument("--edge-keep", type=float, default=0.85)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", type=str, default=None)
    gen.set_defaults(func=_cmd_gen)

    run = subparsers.add_parser("run", help="run the mechanism once and print the outcome")
    run.add_argument("--instance", required=True)
    run.add_argument("--epsilon", type=float, default=0.1)
    run.add_argument("--packer", required=True)
    run.add_argument("--out", type=str, default=None)
    _add_common(run)
    run.set_defaults(func=_cmd_run)

    audit = subparsers.add_parser("audit", help="truthfulness audit on one instance")
    audit.add_argument("--instance", required=True)
    audit.add_argument("--epsilon", type=float, default=0.1)
    audit.add_argument("--packer", required=True)
    audit.add_argument("--tapes", type=int, default=10)
    audit.add_argument("--deviations", type=int, default=20)
    audit.add_argument("--out", type=str, default=None, help="report path prefix")
    _add_common(audit)
    audit.set_defaults(func=_cmd_audit)

    bench = subparsers.add_parser("bench", help="Monte Carlo welfare experiment")
    bench.add_argument("--instance", required=True)
    bench.add_argument("--epsilon", type=float, default=0.1)
    bench.add_argument("--packer", required=True)
    bench.add_argument("--trials", type=int, default=2000)
    bench.add_argument("--oracle", action="store_true", help="compare against the exact optimum")
    bench.add_argument("--plot", action="store_true", help="also write an SVG histogram")
    bench.add_argument("--out", type=str, default=None, help="report path prefix")
    _add_common(bench)
    bench.set_defaults(func=_cmd_bench)

    psi = subparsers.add_parser("psi", help="measured packing quality versus the oracle")
    psi.add_argument("--packer", required=True)
    psi.add_argument("--instance", action="append", required=True, help="repeatable")
    psi.add_argument("--min-ratio", type=float, default=None)
    psi.add_argument("--out", type=str, default=None, help="report path prefix")
    psi.add_argument(
        "--oracle-limit", type=int, default=DEFAULT_BIDDER_LIMIT, help="oracle bidder cap"
    )
    psi.set_defaults(func=_cmd_psi)

    oracle = subparsers.add_parser("oracle", help="exact solve of a small instance")
    oracle.add_argument("--instance", required=True)
    oracle.add_argument("--cardinality", action="store_true", help="unit values")
    oracle.add_argument("--limit", type=int, default=DEFAULT_BIDDER_LIMIT)
    oracle.add_argument("--channel-limit", type=int, default=DEFAULT_CHANNEL_LIMIT)
    _add_common(oracle)
    oracle.set_defaults(func=_cmd_oracle)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
