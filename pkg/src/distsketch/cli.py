"""Command-line harness: generate graphs, build sketches, query, verify.

Every command is a pure function of its arguments (including --seed):
rerunning with the same configuration produces byte-identical files.
Exit codes: 0 success, 1 verification failure, 2 usage, 3 bad graph
input, 4 round limit exceeded, 5 sampling retry budget exhausted,
6 I/O or decode failure.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds
from .gd import build_gd_sketches
from .graphs import GenerationError, GraphError, WeightedGraph, generate, load_edge_list, serialize
from .oracle import all_pairs, hop_diameter, shortest_path_diameter
from .protocol import FIXED, MODES
from .query import ESTIMATORS, StretchReport, stretch_report
from .rng import Rng
from .sim import RoundLimitError, RunMetrics
from .sketchio import SketchDecodeError, load, save
from .slack import RetryBudgetError, build_cdg_sketches, build_density_net, build_slack3_sketches
from .sketches import IncompatibleSketchError
from .tz import ResampleError, build_tz_sketches

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_GRAPH = 3
EXIT_ROUND_LIMIT = 4
EXIT_RETRY = 5
EXIT_IO = 6

METRICS_SCHEMA_VERSION = 1

SCHEMES = ("tz", "slack3", "cdg", "gd")


def _parse_eps(text: str) -> Fraction:
    eps = Fraction(text)
    if not 0 < eps <= 1:
        raise argparse.ArgumentTypeError("eps must lie in (0, 1]")
    return eps


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="distsketch", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a graph in edge-list format")
    gen.add_argument("kind", choices=("path", "grid", "er", "rw"))
    gen.add_argument("args", nargs="*", type=float, help="kind-specific sizes")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--wmin", type=int, default=1)
    gen.add_argument("--wmax", type=int, default=1)
    gen.add_argument("--out", type=Path, default=None, help="default stdout")

    def common(p: argparse.ArgumentParser, need_out: bool) -> None:
        p.add_argument("--graph", type=Path, required=True)
        p.add_argument("--scheme", choices=SCHEMES, required=True)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--eps", type=_parse_eps, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mode", choices=MODES, default=FIXED)
        if need_out:
            p.add_argument("--out", type=Path, required=True)
            p.add_argument("--metrics", type=Path, default=None,
                           help="default <out>.metrics.json")

    build = sub.add_parser("build", help="build sketches and emit metrics")
    common(build, need_out=True)

    query = sub.add_parser("query", help="estimate one pairwise distance")
    query.add_argument("--sketches", type=Path, required=True)
    query.add_argument("u", type=int)
    query.add_argument("v", type=int)

    verify = sub.add_parser("verify", help="sweep stretch against ceilings")
    common(verify, need_out=False)
    verify.add_argument("--sketches", type=Path, default=None,
                        help="verify an existing sketch file instead of building")
    verify.add_argument("--pairs", default="all",
                        help="'all' or 'sample:M' for M random pairs")
    verify.add_argument("--report", type=Path, default=None,
                        help="write the stretch report as JSON")
    verify.add_argument("--csv", type=Path, default=None,
                        help="write one row per swept pair")
    return top


class UsageError(ValueError):
    """Scheme/parameter combination the CLI cannot run."""


def _scheme_params(args) -> tuple[int | None, Fraction | None]:
    scheme = args.scheme
    if scheme == "tz":
        if args.k is None:
            raise UsageError("tz requires --k")
        return args.k, None
    if scheme == "slack3":
        if args.eps is None:
            raise UsageError("slack3 requires --eps")
        return None, args.eps
    if scheme == "cdg":
        if args.k is None or args.eps is None:
            raise UsageError("cdg requires --k and --eps")
        return args.k, args.eps
    return None, None


def _build_sketches(g: WeightedGraph, args, S: int):
    rng = Rng(args.seed)
    k, eps = _scheme_params(args)
    if args.scheme == "tz":
        return build_tz_sketches(g, k, rng, args.mode, S)
    if args.scheme == "slack3":
        net = build_density_net(g, eps, rng)
        return build_slack3_sketches(g, net, args.mode, S)
    if args.scheme == "cdg":
        return build_cdg_sketches(g, eps, k, rng, args.mode, S)
    return build_gd_sketches(g, rng, args.mode, S)


def _metrics_doc(g, args, S, D, metrics: RunMetrics, sketches) -> dict:
    words = [sk.words() for sk in sketches.values()]
    return {
        "version": METRICS_SCHEMA_VERSION,
        "n": g.n,
        "m": g.m,
        "S": S,
        "D": D,
        "scheme": args.scheme,
        "k": args.k,
        "eps": [args.eps.numerator, args.eps.denominator] if args.eps else None,
        "seed": args.seed,
        "mode": args.mode,
        "rounds": metrics.rounds,
        "data_msgs": metrics.data_msgs,
        "control_msgs": metrics.control_msgs,
        "per_phase": [
            {
                "phase": p.phase,
                "rounds": p.rounds,
                "data_msgs": p.data_msgs,
                "control_msgs": p.control_msgs,
            }
            for p in metrics.per_phase
        ],
        "max_nonempty_queues": metrics.max_nonempty_queues,
        "by_kind": dict(sorted(metrics.by_kind.items())),
        "sketch_words": {
            "max": max(words),
            "mean": statistics.mean(words),
        },
    }


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def cmd_gen(args) -> int:
    sizes = [int(a) for a in args.args]
    if args.kind == "path":
        kind, params = "path", {"n": sizes[0], "weight": args.wmax}
    elif args.kind == "grid":
        kind, params = "grid", {"rows": sizes[0], "cols": sizes[1], "weight": args.wmax}
    elif args.kind == "er":
        kind = "erdos_renyi"
        params = {"n": sizes[0], "p": args.args[1], "wmin": args.wmin, "wmax": args.wmax}
    else:
        kind = "random_weighted"
        extra = sizes[1] if len(sizes) > 1 else sizes[0]
        params = {"n": sizes[0], "extra_edges": extra, "wmax": args.wmax}
    g = generate(kind, params, Rng(args.seed))
    text = serialize(g)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return EXIT_OK


def cmd_build(args) -> int:
    g = load_edge_list(args.graph.read_text())
    S = shortest_path_diameter(g)
    D = hop_diameter(g)
    sketches, metrics = _build_sketches(g, args, S)
    save(args.out, args.scheme, g.n, sketches)
    metrics_path = args.metrics or args.out.with_suffix(args.out.suffix + ".metrics.json")
    _write_json(metrics_path, _metrics_doc(g, args, S, D, metrics, sketches))
    return EXIT_OK


def cmd_query(args) -> int:
    scheme, n, sketches = load(args.sketches)
    if not (0 <= args.u < n and 0 <= args.v < n):
        raise UsageError("node id out of range")
    est = ESTIMATORS[scheme](sketches[args.u], sketches[args.v])
    print(est)
    return EXIT_OK


def _ceilings(scheme: str, k: int | None, eps: Fraction | None, n: int, gd_params):
    """(all-pairs ceiling or None, {eps: far-pair ceiling})."""
    if scheme == "tz":
        return Fraction(2 * k - 1), {}
    if scheme == "slack3":
        return None, {eps: Fraction(3)}
    if scheme == "cdg":
        return None, {eps: Fraction(8 * k - 1)}
    per_eps = {e: Fraction(8 * kk - 1) for e, kk in gd_params}
    k_max = gd_params[-1][1]
    return Fraction(8 * k_max - 1), per_eps


def _report_doc(report: StretchReport, pairs: int) -> dict:
    return {
        "max_stretch": float(report.max_stretch),
        "avg_stretch": float(report.avg_stretch),
        "slack_view": {
            f"{eps.numerator}/{eps.denominator}": {
                "max": float(far_max),
                "violations": violations,
            }
            for eps, (far_max, violations) in sorted(report.slack_view.items())
        },
        "pairs": pairs,
    }


def cmd_verify(args) -> int:
    from .gd import gd_level_params

    g = load_edge_list(args.graph.read_text())
    S = shortest_path_diameter(g)
    if args.sketches is not None:
        try:
            scheme, n, sketches = load(args.sketches)
        except SketchDecodeError as exc:
            print(f"invariant violated: {exc}")
            return EXIT_VERIFY_FAILED
        if scheme != args.scheme or n != g.n:
            print("invariant violated: sketch file does not match configuration")
            return EXIT_VERIFY_FAILED
    else:
        sketches, _ = _build_sketches(g, args, S)
    gd_params = gd_level_params(g.n) if args.scheme == "gd" else None
    all_ceiling, per_eps = _ceilings(args.scheme, args.k, args.eps, g.n, gd_params)
    estimator = ESTIMATORS[args.scheme]
    sample = None
    if args.pairs != "all":
        if not args.pairs.startswith("sample:"):
            raise UsageError("--pairs must be 'all' or 'sample:M'")
        sample = int(args.pairs.split(":", 1)[1])
    dist = all_pairs(g)
    try:
        report = stretch_report(
            g,
            lambda u, v: estimator(sketches[u], sketches[v]),
            sample=sample,
            rng=Rng(args.seed).substream(999),
            slack_eps=per_eps,
            dist=dist,
        )
    except (IncompatibleSketchError, ValueError) as exc:
        print(f"invariant violated: {exc}")
        return EXIT_VERIFY_FAILED
    failures = []
    for _, _, d, est, _ in report.per_pair:
        if est < d:
            failures.append("estimate below true distance")
            break
    if all_ceiling is not None and report.max_stretch > all_ceiling:
        failures.append(
            f"max stretch {float(report.max_stretch):.3f} exceeds {float(all_ceiling)}"
        )
    for eps, (far_max, violations) in sorted(report.slack_view.items()):
        if violations:
            failures.append(f"{violations} far-pair violations at eps={eps}")
    if args.report:
        _write_json(args.report, _report_doc(report, len(report.per_pair)))
    if args.csv:
        rows = ["u,v,true,estimate,stretch"]
        rows += [
            f"{u},{v},{d},{est},{float(r):.6f}" for u, v, d, est, r in report.per_pair
        ]
        args.csv.write_text("\n".join(rows) + "\n")
    if failures:
        for f in failures:
            print(f"FAIL: {f}")
        return EXIT_VERIFY_FAILED
    print(
        f"PASS: max={float(report.max_stretch):.4f} "
        f"avg={float(report.avg_stretch):.4f} pairs={len(report.per_pair)}"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "build":
            return cmd_build(args)
        if args.command == "query":
            return cmd_query(args)
        return cmd_verify(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    except RoundLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ROUND_LIMIT
    except (ResampleError, RetryBudgetError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RETRY
    except (OSError, SketchDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
