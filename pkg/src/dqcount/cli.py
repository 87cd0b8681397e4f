"""Batch experiment driver.

Subcommands:

  count          repeated distributed counting runs; per-repetition CSV and
                 an aggregate JSON summary
  inner-product  two-party inner-product estimation with transfer ledger
  hamming        two-party Hamming-distance estimation
  compare-miqae  epsilon sweep comparing the node estimator against the
                 single-machine baseline at a fixed amplitude
  bench          closed-form resource report for a problem size
  prop-check     run the built-in property suites

Every command takes  --seed and produces byte-identical output for
identical (config, seed). Exit codes: 0 success, 1 estimation failure,
2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Sequence, Union

from . import checks, metrics
from .applications import (
    HAMMING,
    INNER_PRODUCT,
    communication_bound,
    estimate_hamming,
    estimate_inner_product,
)
from .coordinator import run_distributed
from .diqc import DiqcConfig, run_amplitude
from .miqae import MiqaeConfig, run_for_amplitude
from .oracle import load_bit_vector, load_marked_set, make_oracle

# column meanings: count_estimate is the real-valued 2^m * amplitude;
# amplitude_low/high bound the slice's marked fraction; oracle_calls counts
# one query per amplification iterate per shot, oracle_calls_physical every
# state preparation; max_big_k is the largest odd amplification factor used.
_RUN_COLUMNS = [
    "rep",
    "node_id",
    "seed",
    "t_prime",
    "count_estimate",
    "amplitude_low",
    "amplitude_high",
    "oracle_calls",
    "oracle_calls_physical",
    "total_shots",
    "max_big_k",
    "status",
]

# one row per adaptive round: big_k odd amplification factor, quadrant of the
# amplified angle, r_weight rotation parameter, q_stage growth factor,
# shots taken this round against shots_cap, pooled_shots behind the interval,
# a_* the measured amplified probability and its bounds, theta_* the angle
# interval in radians after the round.
_TRACE_COLUMNS = [
    "rep",
    "node_id",
    "round",
    "big_k",
    "quadrant",
    "r_weight",
    "q_stage",
    "shots",
    "pooled_shots",
    "shots_cap",
    "a_hat",
    "a_min",
    "a_max",
    "theta_min",
    "theta_max",
    "backtracked",
]


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset flags from the JSON config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    with open(args.config, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        parser.error("config file must hold a JSON object")
    for key, value in payload.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            parser.error(f"config file sets unknown option {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, value)


def _resolve_marked(args, parser) -> tuple[int, frozenset[int]]:
    if args.marked is None and args.oracle_file is None:
        parser.error("need --marked or --oracle-file")
    if args.marked is not None:
        marked = frozenset(int(tok) for tok in str(args.marked).split(",") if tok != "")
        width = None
    else:
        marked, width = load_marked_set(args.oracle_file)
    n = args.n if args.n is not None else width
    if n is None:
        parser.error("need --n (or a bit-string oracle file that implies it)")
    return int(n), marked


def _node_budget(args, parser) -> tuple[float, float]:
    """Global (epsilon, alpha) from either global or per-node flags."""
    nodes = 1 << args.k
    if args.epsilon_node is not None:
        if args.epsilon is not None:
            parser.error("--epsilon and --epsilon-node are mutually exclusive")
        epsilon = args.epsilon_node * nodes
    else:
        epsilon = args.epsilon if args.epsilon is not None else 0.002
    if args.alpha_node is not None:
        if args.alpha is not None:
            parser.error("--alpha and --alpha-node are mutually exclusive")
        alpha = args.alpha_node * nodes
    else:
        alpha = args.alpha if args.alpha is not None else 0.1
    return epsilon, alpha


def _cmd_count(args, parser) -> int:
    n, marked = _resolve_marked(args, parser)
    oracle = make_oracle(n, marked)
    epsilon, alpha = _node_budget(args, parser)
    reps = args.reps if args.reps is not None else 1
    seed = args.seed if args.seed is not None else 0
    nodes = 1 << args.k
    out = Path(args.out if args.out is not None else "count-out")

    rows: list[list] = []
    trace_rows: list[list] = []
    t_counts: dict[int, int] = {}
    per_node_acc = [
        {"c": 0.0, "t": 0.0, "calls": 0.0, "max_k": 0.0, "depth": 0.0,
         "shots": 0.0, "successes": 0}
        for _ in range(nodes)
    ]
    statuses = []
    for rep in range(reps):
        base_seed = seed + rep * nodes
        agg = run_distributed(
            oracle,
            args.k,
            epsilon,
            alpha,
            scheme=args.scheme,
            shots_per_batch=args.shots_per_batch,
            base_seed=base_seed,
            backend=args.backend,
            parallel=args.parallel,
        )
        statuses.append(agg.status)
        t_counts[agg.t_prime] = t_counts.get(agg.t_prime, 0) + 1
        for res in agg.per_node:
            rows.append(
                [
                    rep, res.node_id, res.seed, res.t_prime, repr(res.c),
                    repr(res.a_low), repr(res.a_high), res.oracle_calls,
                    res.oracle_calls_physical, res.total_shots, res.max_big_k,
                    res.status,
                ]
            )
            acc = per_node_acc[res.node_id]
            acc["c"] += res.c
            acc["t"] += res.t_prime
            acc["calls"] += res.oracle_calls
            acc["max_k"] += res.max_big_k
            acc["depth"] += (res.max_big_k - 1) // 2
            acc["shots"] += res.total_shots
            acc["successes"] += res.succeeded
            if args.trace:
                for rd in res.rounds:
                    trace_rows.append(
                        [
                            rep, res.node_id, rd.index, rd.big_k, rd.quadrant,
                            repr(rd.r), rd.q, rd.shots, rd.pooled_shots,
                            rd.shots_cap, repr(rd.a_hat), repr(rd.a_min),
                            repr(rd.a_max), repr(rd.theta_min),
                            repr(rd.theta_max), int(rd.backtracked),
                        ]
                    )
    summary = {
        "config": {
            "n": n,
            "k": args.k,
            "marked": sorted(marked),
            "epsilon": epsilon,
            "alpha": alpha,
            "epsilon_node": epsilon / nodes,
            "alpha_node": alpha / nodes,
            "shots_per_batch": args.shots_per_batch,
            "scheme": args.scheme,
            "backend": args.backend,
            "reps": reps,
            "seed": seed,
        },
        "qubits_per_node": n - args.k + 2,
        "per_node": [
            {
                "node_id": j,
                "mean_c": acc["c"] / reps,
                "mean_t_prime": acc["t"] / reps,
                "mean_oracle_calls": acc["calls"] / reps,
                "mean_max_big_k": acc["max_k"] / reps,
                "mean_depth": acc["depth"] / reps,
                "mean_total_shots": acc["shots"] / reps,
                "successes": acc["successes"],
            }
            for j, acc in enumerate(per_node_acc)
        ],
        "t_prime_counts": {str(t): c for t, c in sorted(t_counts.items())},
        "failed_reps": sum(s != "success" for s in statuses),
        "error_bound": (1 << (n - args.k)) / 2 * 3 * epsilon + (1 << (args.k + 1)) / 3,
        "confidence": 1 - 4 * alpha / 3,
    }
    _write_csv(out / "runs.csv", _RUN_COLUMNS, rows)
    _write_json(out / "summary.json", summary)
    if args.trace:
        _write_csv(out / "trace.csv", _TRACE_COLUMNS, trace_rows)
    print(f"wrote {out}/runs.csv and {out}/summary.json")
    return 0 if all(s == "success" for s in statuses) else 1


def _load_vector(arg: str):
    path = Path(arg)
    if path.exists():
        return load_bit_vector(path)
    if set(arg) <= {"0", "1"} and len(arg) >= 2:
        return [int(c) for c in arg]
    raise ValueError(f"{arg!r} is neither a file nor a 0/1 string")


def _cmd_pair(args, parser, which: str) -> int:
    x = _load_vector(args.x)
    y = _load_vector(args.y)
    epsilon = args.epsilon if args.epsilon is not None else 0.01
    alpha = args.alpha if args.alpha is not None else 0.05
    seed = args.seed if args.seed is not None else 0
    runner = estimate_inner_product if which == INNER_PRODUCT else estimate_hamming
    result = runner(
        x, y, args.k, epsilon, alpha,
        shots_per_batch=args.shots_per_batch,
        base_seed=seed,
        backend=args.backend,
    )
    if which == INNER_PRODUCT:
        exact = sum(a & b for a, b in zip(x, y)) / (1 << result.n)
    else:
        exact = sum(a ^ b for a, b in zip(x, y)) / (1 << result.n)
    payload = result.to_dict()
    payload["exact"] = exact
    payload["abs_error"] = abs(result.estimate - exact)
    payload["communication_bound"] = communication_bound(
        which, result.n, args.k, epsilon / (1 << args.k), alpha / (1 << args.k)
    )
    payload["config"] = {
        "epsilon": epsilon,
        "alpha": alpha,
        "k": args.k,
        "seed": seed,
        "backend": args.backend,
        "shots_per_batch": args.shots_per_batch,
    }
    if args.out is not None:
        _write_json(Path(args.out), payload)
        print(f"wrote {args.out}")
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0 if result.succeeded else 1


def _cmd_compare(args, parser) -> int:
    amplitude = args.amplitude if args.amplitude is not None else 1 / 64
    alpha = args.alpha if args.alpha is not None else 0.05
    reps = args.reps if args.reps is not None else 100
    seed = args.seed if args.seed is not None else 0
    if args.epsilons is not None:
        sweep = [float(tok) for tok in args.epsilons.split(",") if tok]
        if not sweep:
            parser.error("empty epsilon sweep")
    else:
        sweep = [0.005, 0.002, 0.001]
    out = Path(args.out if args.out is not None else "compare-out")
    rows = []
    for eps in sweep:
        node_cfg = DiqcConfig(epsilon_node=eps, alpha_node=alpha,
                              shots_per_batch=args.shots_per_batch)
        base_cfg = MiqaeConfig(epsilon=eps, alpha=alpha,
                               shots_per_batch=args.shots_per_batch)
        for name, runner in (
            ("diqc", lambda s: run_amplitude(amplitude, node_cfg, seed=s)),
            ("miqae", lambda s: run_for_amplitude(amplitude, base_cfg, seed=s)),
        ):
            results = [runner(seed + rep) for rep in range(reps)]
            good = [res for res in results if res.succeeded]
            pool = good if good else results
            rows.append(
                [
                    repr(eps),
                    name,
                    len(good),
                    repr(sum(res.max_big_k for res in pool) / len(pool)),
                    repr(sum(res.oracle_calls for res in pool) / len(pool)),
                    repr(sum(res.total_shots for res in pool) / len(pool)),
                ]
            )
    _write_csv(
        out / "sweep.csv",
        ["epsilon", "algorithm", "successes", "mean_max_big_k",
         "mean_oracle_calls", "mean_total_shots"],
        rows,
    )
    print(f"wrote {out}/sweep.csv")
    return 0


def _cmd_bench(args, parser) -> int:
    n = args.n if args.n is not None else 6
    k = args.k
    epsilon_node = args.epsilon_node if args.epsilon_node is not None else 0.001
    alpha_node = args.alpha_node if args.alpha_node is not None else 0.05
    central, node = metrics.counting_comparison(n, k)
    payload = {
        "n": n,
        "k": k,
        "centralized": vars(central),
        "per_node": vars(node),
        "cost_dominance_holds": metrics.centralized_cost_dominates(n, k),
        "k_max_cap": metrics.k_max_cap(epsilon_node),
        "query_bound": metrics.query_bound(epsilon_node, alpha_node),
        "communication_bound_inner": communication_bound(
            INNER_PRODUCT, n, k, epsilon_node, alpha_node
        ),
        "communication_bound_hamming": communication_bound(
            HAMMING, n, k, epsilon_node, alpha_node
        ),
        "budget": {"epsilon_node": epsilon_node, "alpha_node": alpha_node},
    }
    if args.out is not None:
        _write_json(Path(args.out), payload)
        print(f"wrote {args.out}")
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def _cmd_prop_check(args, parser) -> int:
    seed = args.seed if args.seed is not None else 0
    reports = checks.run_all(seed=seed, quick=not args.full)
    if args.inject_failure:
        reports.append(
            {"name": "injected_failure", "passed": False, "cases": 0,
             "note": "forced by --inject-failure"}
        )
    for rep in reports:
        print(f"{'PASS' if rep['passed'] else 'FAIL'}  {rep['name']} ({rep['cases']} cases)")
    if args.out is not None:
        _write_json(Path(args.out), {"suites": reports})
    return 0 if all(rep["passed"] for rep in reports) else 1


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="base RNG seed (default 0)")
    sub.add_argument("--out", type=str, default=None, help="output path")
    sub.add_argument("--config", type=str, default=None,
                     help="JSON file supplying defaults; flags win")


def _add_estimation(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--k", type=int, default=1, help="log2 node count")
    sub.add_argument("--backend", choices=("analytic", "statevector"),
                     default="analytic")
    sub.add_argument("--shots-per-batch", type=int, default=1)
    sub.add_argument("--epsilon", type=float, default=None,
                     help="global target half-width")
    sub.add_argument("--alpha", type=float, default=None,
                     help="global significance level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqcount",
        description="Distributed approximate-counting experiment driver",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("count", help="repeated distributed counting runs")
    _add_common(p)
    _add_estimation(p)
    p.add_argument("--n", type=int, default=None, help="index register width")
    p.add_argument("--marked", type=str, default=None,
                   help="comma-separated marked indices")
    p.add_argument("--oracle-file", type=str, default=None,
                   help="marked-set file (ints or bit strings, one per line)")
    p.add_argument("--epsilon-node", type=float, default=None,
                   help="per-node half-width (alternative to --epsilon)")
    p.add_argument("--alpha-node", type=float, default=None,
                   help="per-node significance (alternative to --alpha)")
    p.add_argument("--scheme", choices=("prefix", "stride"), default="prefix")
    p.add_argument("--reps", type=int, default=None, help="repetitions (default 1)")
    p.add_argument("--parallel", action="store_true",
                   help="run nodes in a thread pool (same output)")
    p.add_argument("--trace", action="store_true", help="also write trace.csv")

    for cmd, blurb in (("inner-product", "inner product"), ("hamming", "Hamming distance")):
        p = subs.add_parser(cmd, help=f"two-party {blurb} estimation")
        _add_common(p)
        _add_estimation(p)
        p.add_argument("--x", type=str, required=True,
                       help="bit vector: 0/1 string or file path")
        p.add_argument("--y", type=str, required=True)

    p = subs.add_parser("compare-miqae",
                        help="sweep epsilon, node estimator vs baseline")
    _add_common(p)
    p.add_argument("--amplitude", type=float, default=None,
                   help="true amplitude (default 1/64)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--epsilons", type=str, default=None,
                   help="comma-separated sweep (default 0.005,0.002,0.001)")
    p.add_argument("--reps", type=int, default=None, help="runs per point (default 100)")
    p.add_argument("--shots-per-batch", type=int, default=1)

    p = subs.add_parser("bench", help="closed-form resource report")
    _add_common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--epsilon-node", type=float, default=None)
    p.add_argument("--alpha-node", type=float, default=None)

    p = subs.add_parser("prop-check", help="run the built-in property suites")
    _add_common(p)
    p.add_argument("--full", action="store_true",
                   help="use the full equivalence grid (slower)")
    p.add_argument("--inject-failure", action="store_true",
                   help=argparse.SUPPRESS)

    return parser


def main(argv: Union[Sequence[str], None] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _load_config_file(args, parser)
    try:
        if args.command == "count":
            return _cmd_count(args, parser)
        if args.command == "inner-product":
            return _cmd_pair(args, parser, INNER_PRODUCT)
        if args.command == "hamming":
            return _cmd_pair(args, parser, HAMMING)
        if args.command == "compare-miqae":
            return _cmd_compare(args, parser)
        if args.command == "bench":
            return _cmd_bench(args, parser)
        if args.command == "prop-check":
            return _cmd_prop_check(args, parser)
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
