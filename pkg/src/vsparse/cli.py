"""Command-line front end.

Four subcommands: ``sparsify`` runs the full pipeline (optimal operator,
sparsifier, quality reports for all three semantics), ``quality`` grades a
given sparsifier under one semantics, ``certify`` verifies a certificate
file, and ``oracle`` cross-checks the LP machinery against brute-force
computations. All artifacts are canonical JSON written atomically, and a
fixed ``--seed`` makes every byte of output reproducible.

Exit codes: 0 success, 2 parse or validation error, 3 solver hit the
iteration cap, 4 unbounded quality or distortion, 5 oracle mismatch.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import certificates, jsonio, operators, quality
from .core import WeightedGraph, cut_metric, is_unbounded
from .extension import (
    best_zero_extension,
    min_cut_by_enumeration,
    min_cut_via_flow,
    min_cut_via_lp,
    min_extension,
)
from .sampling import random_demands, random_metric

OK, PARSE_ERROR, NO_CONVERGENCE, UNBOUNDED_EXIT, ORACLE_MISMATCH = 0, 2, 3, 4, 5

FLOW_DEMAND_SETS = 10


@dataclass(frozen=True)
class RunConfig:
    """One command's full configuration; the seed pins all sampling."""

    command: str
    inputs: tuple[Path, ...]
    out: Path | None
    seed: int
    max_iters: int
    budget: int
    samples: int
    semantics: str | None
    mode: str | None


def _config(args: argparse.Namespace) -> RunConfig:
    inputs = tuple(
        Path(p) for p in (getattr(args, "graph", None), getattr(args, "sparsifier", None),
                          getattr(args, "certificate", None), getattr(args, "demands", None))
        if p is not None)
    out = getattr(args, "out", None)
    return RunConfig(
        command=args.command,
        inputs=inputs,
        out=Path(out) if out is not None else None,
        seed=getattr(args, "seed", 0),
        max_iters=getattr(args, "max_iters", 10_000),
        budget=getattr(args, "budget", 1_000_000),
        samples=getattr(args, "samples", 100),
        semantics=getattr(args, "semantics", None),
        mode=getattr(args, "mode", None),
    )


def _load(path: Path) -> object:
    return jsonio.loads(path.read_text(encoding="utf-8"))


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _emit(report: quality.QualityReport, out: Path | None) -> None:
    blob = jsonio.dump_canonical(quality.report_to_json(report))
    if out is None:
        sys.stdout.write(blob)
    else:
        _write_atomic(out, blob)


def cmd_sparsify(cfg: RunConfig) -> int:
    graph = jsonio.graph_from_json(_load(cfg.inputs[0]))
    out_dir = cfg.out
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        report = operators.find_optimal_operator(graph, max_iters=cfg.max_iters)
    except operators.NoFiniteDistortionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return UNBOUNDED_EXIT
    beta = operators.operator_to_sparsifier(report.operator, report.graph)
    _write_atomic(out_dir / "operator.json",
                  jsonio.dump_canonical(operators.operator_to_json(report.operator)))
    _write_atomic(out_dir / "sparsifier.json",
                  jsonio.dump_canonical(quality.sparsifier_to_json(beta)))
    if not report.converged:
        print(f"error: no convergence within {cfg.max_iters} rounds; "
              "operator.json and sparsifier.json hold the best iterate",
              file=sys.stderr)
        return NO_CONVERGENCE

    # one master generator; every sampled artifact descends from it
    rng = random.Random(cfg.seed)
    metric_seed = rng.randrange(1 << 63)
    g_c = report.graph
    cut_report = quality.cut_quality(g_c, beta)
    metric_report = quality.metric_quality(g_c, beta, samples=cfg.samples,
                                           seed=metric_seed)
    if g_c.k >= 2:
        demand_sets = [random_demands(rng, g_c.k, g_c.k)
                       for _ in range(FLOW_DEMAND_SETS)]
        flow_report = quality.flow_quality_probe(g_c, beta, demand_sets)
    else:
        # a single terminal admits no demands; nothing to preserve
        flow_report = quality.QualityReport(quality.FLOW, Fraction(1), True, None,
                                            quality.SAMPLED)
    for name, rep in (("quality_cut.json", cut_report),
                      ("quality_metric.json", metric_report),
                      ("quality_flow.json", flow_report)):
        _write_atomic(out_dir / name, jsonio.dump_canonical(quality.report_to_json(rep)))
    print(f"Q = {jsonio.format_fraction(report.q)} "
          f"({report.iterations} rounds, {report.membership_cuts} membership cuts, "
          f"{report.distortion_cuts} distortion cuts)")
    return OK


def cmd_quality(cfg: RunConfig) -> int:
    graph = jsonio.graph_from_json(_load(cfg.inputs[0]))
    beta = quality.sparsifier_from_json(_load(cfg.inputs[1]))
    if beta.k != graph.k:
        print(f"error: sparsifier has {beta.k} terminals, graph has {graph.k}",
              file=sys.stderr)
        return PARSE_ERROR
    if cfg.semantics == quality.CUT:
        report = quality.cut_quality(graph, beta)
    elif cfg.semantics == quality.METRIC:
        report = quality.metric_quality(graph, beta, samples=cfg.samples, seed=cfg.seed)
    else:
        if len(cfg.inputs) < 3:
            print("error: flow semantics requires --demands", file=sys.stderr)
            return PARSE_ERROR
        demands = jsonio.demands_from_json(_load(cfg.inputs[2]))
        report = quality.flow_quality_probe(graph, beta, [demands])
    _emit(report, cfg.out)
    if is_unbounded(report.q_value):
        return UNBOUNDED_EXIT
    return OK


def cmd_certify(cfg: RunConfig) -> int:
    cert = certificates.certificate_from_json(_load(cfg.inputs[0]))
    if isinstance(cert, certificates.CutCertificate):
        value = certificates.certify_cut(cert)
    else:
        value = certificates.certify_metric(cert)
    print("invalid" if value is None else jsonio.format_fraction(value))
    return OK


def _oracle_rows_mincut(graph: WeightedGraph, budget: int) -> list[tuple]:
    rows = []
    for mask in range((1 << (graph.k - 1)) - 1):
        side_mask = (mask << 1) | 1
        side = [p for p in range(graph.k) if side_mask >> p & 1]
        label = f"mincut S={side_mask:#0{graph.k + 2}b}"
        lp_val = min_cut_via_lp(graph, side)
        flow_val = min_cut_via_flow(graph, side)
        enum_val = min_cut_by_enumeration(graph, side, budget=budget)
        rows.append((f"{label} flow", lp_val, flow_val, "=", lp_val == flow_val))
        rows.append((f"{label} enum", lp_val, enum_val, "=", lp_val == enum_val))
    return rows


def _oracle_rows_zeroext(graph: WeightedGraph, budget: int, seed: int,
                         samples: int) -> list[tuple]:
    rows = []
    # cut metrics first: the cheapest 0-extension must hit the min cut exactly
    for mask in range((1 << (graph.k - 1)) - 1):
        side_mask = (mask << 1) | 1
        delta = cut_metric([p for p in range(graph.k) if side_mask >> p & 1], graph.k)
        lp_val = min_extension(graph, delta).value
        ze_val = best_zero_extension(graph, delta, budget=budget).cost
        rows.append((f"zeroext S={side_mask:#0{graph.k + 2}b}", lp_val, ze_val, "=",
                     lp_val == ze_val))
    rng = random.Random(seed)
    for a in range(samples):
        d_y = random_metric(rng, graph.k)
        lp_val = min_extension(graph, d_y).value
        ze_val = best_zero_extension(graph, d_y, budget=budget).cost
        rows.append((f"zeroext sample {a}", lp_val, ze_val, "<=", lp_val <= ze_val))
    return rows


def cmd_oracle(cfg: RunConfig) -> int:
    graph = jsonio.graph_from_json(_load(cfg.inputs[0]))
    rows: list[tuple] = []
    if cfg.mode in ("mincut", "all") and graph.k >= 2:
        rows.extend(_oracle_rows_mincut(graph, cfg.budget))
    if cfg.mode in ("zeroext", "all"):
        samples = min(cfg.samples, 5)
        if graph.k >= 2:
            rows.extend(_oracle_rows_zeroext(graph, cfg.budget, cfg.seed, samples))
    width = max((len(r[0]) for r in rows), default=8)
    mismatch = False
    for name, lhs, rhs, rel, ok in rows:
        mismatch = mismatch or not ok
        print(f"{name:<{width}}  lp={jsonio.format_fraction(lhs)}  "
              f"oracle={jsonio.format_fraction(rhs)}  {rel}  "
              f"{'ok' if ok else 'MISMATCH'}")
    if not rows:
        print("nothing to check: fewer than two terminals")
    return ORACLE_MISMATCH if mismatch else OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsparse",
        description="Exact vertex sparsifiers via optimal metric extension operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0,
                       help="seed for every sampled metric and demand set")
        p.add_argument("--samples", type=int, default=100,
                       help="random metrics for sampled lower checks")

    p_sparsify = sub.add_parser("sparsify", help="solve for the optimal operator "
                                "and write all artifacts")
    p_sparsify.add_argument("graph", help="graph JSON file")
    p_sparsify.add_argument("--out", required=True, help="output directory")
    p_sparsify.add_argument("--max-iters", type=int, default=10_000, dest="max_iters",
                            help="cutting-plane round cap")
    common(p_sparsify)

    p_quality = sub.add_parser("quality", help="grade a sparsifier under one semantics")
    p_quality.add_argument("graph", help="graph JSON file")
    p_quality.add_argument("sparsifier", help="sparsifier JSON file")
    p_quality.add_argument("--semantics", required=True,
                           choices=[quality.CUT, quality.METRIC, quality.FLOW])
    p_quality.add_argument("--demands", default=None,
                           help="demand-set JSON file (flow semantics)")
    p_quality.add_argument("--out", default=None, help="report file (default stdout)")
    common(p_quality)

    p_certify = sub.add_parser("certify", help="verify a certificate file")
    p_certify.add_argument("certificate", help="certificate JSON file")

    p_oracle = sub.add_parser("oracle", help="cross-check LP values against brute force")
    p_oracle.add_argument("graph", help="graph JSON file")
    p_oracle.add_argument("--mode", choices=["mincut", "zeroext", "all"], default="all")
    p_oracle.add_argument("--budget", type=int, default=1_000_000,
                          help="enumeration budget for brute-force oracles")
    common(p_oracle)
    return parser


_COMMANDS = {
    "sparsify": cmd_sparsify,
    "quality": cmd_quality,
    "certify": cmd_certify,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _config(args)
    try:
        return _COMMANDS[cfg.command](cfg)
    except jsonio.JsonFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
