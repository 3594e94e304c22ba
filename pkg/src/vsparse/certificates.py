"""Combinatorial certificates lower-bounding achievable sparsifier quality.

A cut certificate is a pair of distributions over terminal subsets whose
cut marginals nest within a scale c; it certifies that no cut sparsifier
of the instance beats the certified Q. A metric certificate is a finite
family of terminal metrics whose summed minimum extensions exceed the
extension of the summed metric; it certifies the same for metric
sparsifiers. Verification is purely combinatorial plus minimum-extension
evaluations, entirely independent of the operator solver, which is what
makes the harvested certificates a genuine cross-check on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from . import jsonio
from .core import (
    ZERO,
    FractionLike,
    Metric,
    WeightedGraph,
    as_fraction,
    zero_metric,
)
from .extension import min_cut_via_flow, min_extension
from .operators import OperatorSolveReport

Distribution = tuple[tuple[int, Fraction], ...]


def _normalize_distribution(entries: Iterable[tuple[int, FractionLike]], k: int,
                            name: str) -> Distribution:
    merged: dict[int, Fraction] = {}
    for mask, prob in entries:
        if not 0 <= mask < (1 << k):
            raise ValueError(f"{name}: subset mask {mask} outside 0..{(1 << k) - 1}")
        p = as_fraction(prob)
        if p < 0:
            raise ValueError(f"{name}: negative probability {p} on mask {mask}")
        merged[mask] = merged.get(mask, ZERO) + p
    if not merged:
        raise ValueError(f"{name}: empty distribution")
    total = sum(merged.values(), ZERO)
    if total != 1:
        raise ValueError(f"{name}: probabilities sum to {total}, not 1")
    return tuple(sorted(merged.items()))


@dataclass(frozen=True)
class CutCertificate:
    """Distributions mu1, mu2 over terminal subsets, as (bitmask, probability).

    Bit p of a mask selects terminal-local index p. Duplicate masks merge;
    each distribution must sum to exactly 1 with nonnegative entries.
    """

    graph: WeightedGraph
    mu1: Distribution
    mu2: Distribution

    def __init__(self, graph: WeightedGraph,
                 mu1: Iterable[tuple[int, FractionLike]],
                 mu2: Iterable[tuple[int, FractionLike]]):
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "mu1", _normalize_distribution(mu1, graph.k, "mu1"))
        object.__setattr__(self, "mu2", _normalize_distribution(mu2, graph.k, "mu2"))


@dataclass(frozen=True)
class MetricCertificate:
    """A nonempty family of terminal metrics on the instance's terminals."""

    graph: WeightedGraph
    metrics: tuple[Metric, ...]

    def __init__(self, graph: WeightedGraph, metrics: Iterable[Metric]):
        family = tuple(metrics)
        if not family:
            raise ValueError("a metric certificate needs at least one metric")
        for d in family:
            if d.size != graph.k:
                raise ValueError(
                    f"certificate metric has {d.size} points, instance has {graph.k} terminals")
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "metrics", family)


def _expected_min_cut(g: WeightedGraph, mu: Distribution) -> Fraction:
    """E_{S ~ mu}[minext(delta_S)]; empty and full subsets extend for free."""
    full = (1 << g.k) - 1
    total = ZERO
    for mask, prob in mu:
        if not prob or mask == 0 or mask == full:
            continue
        side = [p for p in range(g.k) if mask >> p & 1]
        total += prob * min_cut_via_flow(g, side)
    return total


def certify_cut(cert: CutCertificate) -> Fraction | None:
    """The quality bound a cut certificate proves, or None when it proves nothing.

    For every ordered terminal pair, mu1's probability of separating it must
    fit under c times mu2's; the smallest feasible c then scales the ratio
    of expected cut sizes into the certified Q. A pair separated by mu1 but
    never by mu2 admits no scale, and zero expectations certify nothing;
    both come back as None.
    """
    g = cert.graph
    c_min = ZERO
    for p in range(g.k):
        for q in range(g.k):
            if p == q:
                continue
            m1 = sum((prob for mask, prob in cert.mu1
                      if mask >> p & 1 and not mask >> q & 1), ZERO)
            m2 = sum((prob for mask, prob in cert.mu2
                      if mask >> p & 1 and not mask >> q & 1), ZERO)
            if m2 == 0:
                if m1 > 0:
                    return None
                continue  # 0/0 pairs impose nothing
            c_min = max(c_min, m1 / m2)
    e1 = _expected_min_cut(g, cert.mu1)
    e2 = _expected_min_cut(g, cert.mu2)
    if e1 <= 0 or e2 <= 0:
        return None
    # e1 > 0 forces a separated pair under mu1, so c_min > 0 here
    return e1 / (c_min * e2)


def certify_metric(cert: MetricCertificate) -> Fraction | None:
    """The quality bound a metric family proves, or None when degenerate.

    Sum of the family's minimum extensions over the minimum extension of
    the family's sum; subadditivity makes this at least 1 whenever the
    denominator is positive, and any valid sparsifier's quality must reach
    it. A zero denominator certifies nothing.
    """
    g = cert.graph
    total = zero_metric(g.k)
    numerator = ZERO
    for d in cert.metrics:
        numerator += min_extension(g, d).value
        total = total + d
    denominator = min_extension(g, total).value
    if denominator == 0:
        return None
    return numerator / denominator


def harvest_certificate(report: OperatorSolveReport) -> MetricCertificate:
    """Package a solve's binding worst metrics as a metric certificate.

    The binding constraints are where the optimal operator is tight, which
    makes them natural certificate material; no optimality of the harvested
    bound is claimed, only its soundness, which :func:`certify_metric`
    re-establishes from scratch.
    """
    if not report.converged:
        raise ValueError("only a converged solve can be harvested")
    if not report.worst_metrics:
        raise ValueError("the solve stored no binding worst metrics")
    return MetricCertificate(report.graph, [d for d, _ in report.worst_metrics])


# ---------------------------------------------------------------------------
# wire format


def _distribution_to_json(mu: Distribution) -> list:
    return [[mask, jsonio.format_fraction(prob)] for mask, prob in mu]


def _distribution_from_json(data: object, path: str) -> list[tuple[int, Fraction]]:
    entries = []
    for a, entry in enumerate(jsonio._expect_list(data, path)):
        row = jsonio._expect_list(entry, f"{path}[{a}]")
        if len(row) != 2:
            raise jsonio.JsonFormatError(f"{path}[{a}]", "expected [mask, probability]")
        entries.append((jsonio._expect_int(row[0], f"{path}[{a}][0]"),
                        jsonio.parse_fraction(row[1], f"{path}[{a}][1]")))
    return entries


def certificate_to_json(cert: CutCertificate | MetricCertificate) -> dict:
    if isinstance(cert, CutCertificate):
        return {
            "type": "cut",
            "graph": jsonio.graph_to_json(cert.graph),
            "mu1": _distribution_to_json(cert.mu1),
            "mu2": _distribution_to_json(cert.mu2),
        }
    return {
        "type": "metric",
        "graph": jsonio.graph_to_json(cert.graph),
        "metrics": [jsonio.metric_to_json(d) for d in cert.metrics],
    }


def certificate_from_json(data: object,
                          path: str = "certificate") -> CutCertificate | MetricCertificate:
    obj = jsonio._expect_object(data, path, ("type", "graph"))
    kind = obj["type"]
    graph = jsonio.graph_from_json(obj["graph"], f"{path}.graph")
    try:
        if kind == "cut":
            missing = [key for key in ("mu1", "mu2") if key not in obj]
            if missing:
                raise jsonio.JsonFormatError(path, f"missing fields: {missing}")
            return CutCertificate(graph,
                                  _distribution_from_json(obj["mu1"], f"{path}.mu1"),
                                  _distribution_from_json(obj["mu2"], f"{path}.mu2"))
        if kind == "metric":
            if "metrics" not in obj:
                raise jsonio.JsonFormatError(path, "missing fields: ['metrics']")
            metrics = [jsonio.metric_from_json(d, f"{path}.metrics[{a}]")
                       for a, d in enumerate(jsonio._expect_list(obj["metrics"], f"{path}.metrics"))]
            return MetricCertificate(graph, metrics)
    except ValueError as exc:
        if isinstance(exc, jsonio.JsonFormatError):
            raise
        raise jsonio.JsonFormatError(path, str(exc)) from None
    raise jsonio.JsonFormatError(f"{path}.type", f"unknown certificate type {kind!r}")
