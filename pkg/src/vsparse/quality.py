"""Exact quality evaluation of sparsifiers and operators.

Three semantics share one report shape: cut quality enumerates every
terminal bipartition and compares the sparsifier's cut to the terminal min
cut; metric quality bounds the sparsifier's value against the minimum
extension through a single LP over the vertex metric cone; flow quality
compares maximum concurrent-flow fractions through the dual LPs and checks
the sandwich the metric bound implies. All values are exact rationals; a
ratio against zero is reported as unbounded rather than clamped.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import jsonio, lp
from .core import (
    ONE,
    UNBOUNDED,
    ZERO,
    DemandSet,
    Metric,
    Sparsifier,
    Unbounded,
    WeightedGraph,
    all_pairs,
    canonicalize,
    cut_metric,
    is_unbounded,
    pair,
)
from .extension import MetricConeLp, min_cut_via_flow, min_extension
from .operators import ExtensionOperator
from .sampling import random_metric

CUT, METRIC, FLOW = "cut", "metric", "flow"
EXACT, SAMPLED = "exact", "sampled"


class FlowProbeError(AssertionError):
    """The flow sandwich failed; for pipeline-produced sparsifiers this is a
    solver bug, never a data condition."""


@dataclass(frozen=True)
class QualityReport:
    """Outcome of one quality evaluation.

    ``q_value`` is the worst upper ratio (or unbounded when a zero
    denominator meets a positive numerator); None on lower-check fragments
    that measure no upper ratio. ``lower_ok`` records whether the lower
    bound held everywhere checked; None when the evaluation does not check
    it. ``witness`` achieves q_value: a terminal-subset bitmask for cuts, a
    terminal metric for metric semantics (the violating metric instead when
    the lower check fails), a demand set for flows. ``completeness`` is
    "exact" for exhaustive evaluations and "sampled" where random probing
    was involved.
    """

    semantics: str
    q_value: Fraction | Unbounded | None
    lower_ok: bool | None
    witness: object
    completeness: str


def _check_k(g: WeightedGraph, beta: Sparsifier) -> None:
    if beta.k != g.k:
        raise ValueError(f"sparsifier has {beta.k} terminals, graph has {g.k}")


def cut_quality(g: WeightedGraph, beta: Sparsifier, cap: int = 20) -> QualityReport:
    """Worst ratio of sparsifier cut to terminal min cut, over all bipartitions.

    Enumerates the 2^(k-1) - 1 bipartitions by bitmask (terminal 0 always on
    the inside, ascending masks, ties to the smallest). Min cuts come from
    the max-flow route, which keeps k = 20 within reach; the LP route is
    cross-checked elsewhere. Bipartitions where both values are zero bind
    nothing and are skipped; a zero min cut against a positive sparsifier
    cut makes the quality unbounded. With a single terminal there is
    nothing to preserve and the quality is 1 by convention.
    """
    _check_k(g, beta)
    if g.k > cap:
        raise ValueError(f"cut enumeration over k = {g.k} terminals exceeds cap {cap}")
    best: Fraction | None = None
    best_mask: int | None = None
    unbounded_mask: int | None = None
    lower_ok = True
    # bit 0 stays on the inside, so each bipartition appears exactly once
    for mask in range((1 << (g.k - 1)) - 1):
        side_mask = (mask << 1) | 1
        side = [p for p in range(g.k) if side_mask >> p & 1]
        h_val = beta.cut_value(side)
        g_val = min_cut_via_flow(g, side)
        if h_val < g_val:
            lower_ok = False
        if g_val == 0:
            if h_val > 0 and unbounded_mask is None:
                unbounded_mask = side_mask
            continue
        ratio = h_val / g_val
        if best is None or ratio > best:
            best, best_mask = ratio, side_mask
    if unbounded_mask is not None:
        return QualityReport(CUT, UNBOUNDED, lower_ok, unbounded_mask, EXACT)
    if best is None:
        return QualityReport(CUT, ONE, lower_ok, None, EXACT)
    return QualityReport(CUT, best, lower_ok, best_mask, EXACT)


def metric_quality_upper(g: WeightedGraph, beta: Sparsifier) -> QualityReport:
    """Supremum of beta(d_Y) / minext(d_Y), as one LP.

    Maximizes beta over the restriction of the vertex metric cone sliced by
    alpha(d) <= 1; that slice projects to exactly the terminal metrics of
    minimum extension at most 1, so the optimum is the worst ratio. An
    unbounded LP yields an unbounded report whose witness is a ray: a
    terminal metric with zero-cost extension but positive beta. The lower
    bound is not examined here.
    """
    _check_k(g, beta)
    cone = MetricConeLp(g.n)
    objective: dict[tuple[int, int], Fraction] = {}
    for (p, q), w in beta.beta.items():
        if w:
            key = pair(g.terminals[p], g.terminals[q])
            objective[key] = objective.get(key, ZERO) + w
    budget_row = (dict(g.weights), lp.LE, ONE)
    result = cone.optimize("max", objective, [budget_row])
    if result.status == lp.UNBOUNDED:
        witness = result.ray_table.restrict(g.terminals)
        return QualityReport(METRIC, UNBOUNDED, None, witness, EXACT)
    assert result.status == lp.OPTIMAL
    witness = result.table.restrict(g.terminals)
    return QualityReport(METRIC, result.value, None, witness, EXACT)


def metric_lower_check(g: WeightedGraph, beta: Sparsifier, samples: int = 100,
                       seed: int = 0, cap: int = 20) -> QualityReport:
    """Search for minext(d_Y) > beta(d_Y), the lower-bound violation.

    Checks every cut metric exactly (enough to refute cut semantics, by min
    cut LP integrality) and then ``samples`` seeded random terminal metrics.
    Sparsifiers collapsed from valid operators can never violate, so this
    guards externally supplied beta; a pass is marked "sampled" because
    general metrics are only probed. The report fragment carries no upper
    ratio.
    """
    _check_k(g, beta)
    if g.k > cap:
        raise ValueError(f"cut enumeration over k = {g.k} terminals exceeds cap {cap}")
    for mask in range((1 << (g.k - 1)) - 1):
        side_mask = (mask << 1) | 1
        side = [p for p in range(g.k) if side_mask >> p & 1]
        if beta.cut_value(side) < min_cut_via_flow(g, side):
            return QualityReport(METRIC, None, False, cut_metric(side, g.k), SAMPLED)
    rng = random.Random(seed)
    for _ in range(samples):
        d_y = random_metric(rng, g.k)
        if beta.cost(d_y) < min_extension(g, d_y).value:
            return QualityReport(METRIC, None, False, d_y, SAMPLED)
    return QualityReport(METRIC, None, True, None, SAMPLED)


def metric_quality(g: WeightedGraph, beta: Sparsifier, samples: int = 100,
                   seed: int = 0) -> QualityReport:
    """The full metric report: exact upper ratio, sampled lower check.

    The witness is the upper LP's worst metric unless the lower check finds
    a violation, which is the more important fact and takes the witness
    slot. Completeness is "sampled" because the lower side always is.
    """
    upper = metric_quality_upper(g, beta)
    lower = metric_lower_check(g, beta, samples=samples, seed=seed)
    witness = upper.witness if lower.lower_ok else lower.witness
    return QualityReport(METRIC, upper.q_value, lower.lower_ok, witness, SAMPLED)


def max_concurrent_flow(g: WeightedGraph | Sparsifier, demands: DemandSet) -> Fraction:
    """The largest fraction lambda of all demands routable at once.

    Computed from the dual: minimize alpha(d) over vertex metrics with the
    demand-weighted terminal distances summing to at least 1. Demand
    endpoints are terminal-local, so one demand set applies to a graph and
    to its sparsifier unchanged. Demands must include a positive entry,
    otherwise lambda is meaningless.
    """
    if isinstance(g, Sparsifier):
        g = g.as_graph()
    if not demands.has_positive():
        raise ValueError("concurrent flow needs at least one positive demand")
    if demands.max_endpoint() >= g.k:
        raise ValueError(
            f"demand endpoint {demands.max_endpoint()} outside terminals 0..{g.k - 1}")
    row: dict[tuple[int, int], Fraction] = {}
    for s, t, dem in demands.demands:
        if dem:
            key = pair(g.terminals[s], g.terminals[t])
            row[key] = row.get(key, ZERO) + dem
    cone = MetricConeLp(g.n)
    result = cone.optimize("min", dict(g.weights), [(row, lp.GE, ONE)])
    assert result.status == lp.OPTIMAL  # feasible by scaling, bounded below by 0
    return result.value


def flow_quality_probe(g: WeightedGraph, beta: Sparsifier,
                       demand_sets: Sequence[DemandSet]) -> QualityReport:
    """Check the flow sandwich on sampled demand sets and report the tightest.

    For each demand set D: lambda_G(D) <= lambda_H(D) <= Q * lambda_G(D),
    where Q is the exact metric quality upper bound. Both inequalities are
    theorems for pipeline-produced sparsifiers, so a failure raises
    :class:`FlowProbeError` instead of being reported as data. The report's
    q_value is the largest observed lambda_H / lambda_G (1 if every flow
    pair was zero), with the demand set achieving it as witness.
    """
    _check_k(g, beta)
    if not demand_sets:
        raise ValueError("flow probe needs at least one demand set")
    q_cap = metric_quality_upper(g, beta).q_value
    best: Fraction | None = None
    best_set: DemandSet | None = None
    for ds in demand_sets:
        lam_g = max_concurrent_flow(g, ds)
        lam_h = max_concurrent_flow(beta, ds)
        if lam_h < lam_g:
            raise FlowProbeError(
                f"sparsifier routes less than the graph: {lam_h} < {lam_g} on {ds.demands}")
        if not is_unbounded(q_cap) and lam_h > q_cap * lam_g:
            raise FlowProbeError(
                f"flow ratio exceeds metric quality {q_cap}: "
                f"{lam_h} > {q_cap} * {lam_g} on {ds.demands}")
        if lam_g > 0 and (best is None or lam_h / lam_g > best):
            best, best_set = lam_h / lam_g, ds
    if best is None:
        return QualityReport(FLOW, ONE, True, None, SAMPLED)
    return QualityReport(FLOW, best, True, best_set, SAMPLED)


def evaluate_operator_distortion(phi: ExtensionOperator,
                                 g: WeightedGraph) -> Fraction | Unbounded:
    """Exact supremum of alpha(phi(d_Y)) / minext(d_Y), independent of the solver.

    One LP: maximize the image cost over the vertex metric cone sliced by
    alpha(d) <= 1. The caller vouches for membership (the oracle is public).
    For a solver-produced operator this reproduces the cutting-plane Q
    exactly; unbounded means no finite distortion bound holds for phi.
    """
    g_c, _ = canonicalize(g)
    if g_c.n != phi.n or g_c.k != phi.k:
        raise ValueError(f"operator is {phi.n}/{phi.k} but graph is {g_c.n}/{g_c.k}")
    objective: dict[tuple[int, int], Fraction] = {}
    for xp, w in g_c.weights.items():
        if not w:
            continue
        for yp in all_pairs(phi.k):
            c = phi.value(xp, yp)
            if c:
                objective[yp] = objective.get(yp, ZERO) + w * c
    cone = MetricConeLp(g_c.n)
    result = cone.optimize("max", objective, [(dict(g_c.weights), lp.LE, ONE)])
    if result.status == lp.UNBOUNDED:
        return UNBOUNDED
    assert result.status == lp.OPTIMAL
    return result.value


# ---------------------------------------------------------------------------
# wire formats


def sparsifier_to_json(beta: Sparsifier) -> dict:
    return {
        "k": beta.k,
        "beta": [[p, q, jsonio.format_fraction(w)] for (p, q), w in sorted(beta.beta.items())],
    }


def sparsifier_from_json(data: object, path: str = "sparsifier") -> Sparsifier:
    obj = jsonio._expect_object(data, path, ("k", "beta"))
    k = jsonio._expect_int(obj["k"], f"{path}.k")
    beta: dict[tuple[int, int], Fraction] = {}
    for a, entry in enumerate(jsonio._expect_list(obj["beta"], f"{path}.beta")):
        epath = f"{path}.beta[{a}]"
        row = jsonio._expect_list(entry, epath)
        if len(row) != 3:
            raise jsonio.JsonFormatError(epath, f"expected [p, q, value], got {len(row)} items")
        p = jsonio._expect_int(row[0], f"{epath}[0]")
        q = jsonio._expect_int(row[1], f"{epath}[1]")
        if p == q:
            raise jsonio.JsonFormatError(epath, "pair endpoints must differ")
        key = pair(p, q)
        if key in beta:
            raise jsonio.JsonFormatError(epath, f"duplicate pair ({p}, {q})")
        beta[key] = jsonio.parse_fraction(row[2], f"{epath}[2]")
    try:
        return Sparsifier(k, beta)
    except ValueError as exc:
        raise jsonio.JsonFormatError(path, str(exc)) from None


def _witness_to_json(semantics: str, witness: object) -> object:
    if witness is None:
        return None
    if semantics == CUT:
        return witness
    if semantics == METRIC:
        return jsonio.metric_to_json(witness)
    return [[s, t, jsonio.format_fraction(dem)] for s, t, dem in witness.demands]


def _witness_from_json(semantics: str, data: object, path: str) -> object:
    if data is None:
        return None
    if semantics == CUT:
        return jsonio._expect_int(data, path)
    if semantics == METRIC:
        return jsonio.metric_from_json(data, path)
    rows = jsonio._expect_list(data, path)
    demands = []
    for a, entry in enumerate(rows):
        row = jsonio._expect_list(entry, f"{path}[{a}]")
        if len(row) != 3:
            raise jsonio.JsonFormatError(f"{path}[{a}]", "expected [s, t, demand]")
        demands.append((jsonio._expect_int(row[0], f"{path}[{a}][0]"),
                        jsonio._expect_int(row[1], f"{path}[{a}][1]"),
                        jsonio.parse_fraction(row[2], f"{path}[{a}][2]")))
    return DemandSet(demands)


def report_to_json(report: QualityReport) -> dict:
    if report.q_value is None:
        q: object = None
    elif is_unbounded(report.q_value):
        q = "unbounded"
    else:
        q = jsonio.format_fraction(report.q_value)
    return {
        "semantics": report.semantics,
        "q_value": q,
        "lower_ok": report.lower_ok,
        "witness": _witness_to_json(report.semantics, report.witness),
        "completeness": report.completeness,
    }


def report_from_json(data: object, path: str = "report") -> QualityReport:
    obj = jsonio._expect_object(
        data, path, ("semantics", "q_value", "lower_ok", "witness", "completeness"))
    semantics = obj["semantics"]
    if semantics not in (CUT, METRIC, FLOW):
        raise jsonio.JsonFormatError(f"{path}.semantics", f"unknown semantics {semantics!r}")
    raw_q = obj["q_value"]
    if raw_q is None:
        q: Fraction | Unbounded | None = None
    elif raw_q == "unbounded":
        q = UNBOUNDED
    else:
        q = jsonio.parse_fraction(raw_q, f"{path}.q_value")
    lower_ok = obj["lower_ok"]
    if lower_ok is not None and not isinstance(lower_ok, bool):
        raise jsonio.JsonFormatError(f"{path}.lower_ok", "expected true, false or null")
    completeness = obj["completeness"]
    if completeness not in (EXACT, SAMPLED):
        raise jsonio.JsonFormatError(f"{path}.completeness",
                                     f"unknown completeness {completeness!r}")
    witness = _witness_from_json(semantics, obj["witness"], f"{path}.witness")
    return QualityReport(semantics, q, lower_ok, witness, completeness)
