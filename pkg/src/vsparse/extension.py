"""Minimum metric extensions and their combinatorial cross-checks.

``min_extension`` computes, by exact LP, the cheapest semimetric on all
vertices that agrees with a prescribed semimetric on the terminals; the
weighted cost counts each unordered pair once. Two independent oracles keep it
honest: an augmenting-path max-flow (for cut metrics the minimum extension
is exactly a terminal min cut) and exhaustive 0-extension enumeration
(an upper bound for arbitrary metrics).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import lp
from .core import (
    ZERO,
    Metric,
    Pair,
    WeightedGraph,
    all_pairs,
    alpha_cost,
    cut_metric,
    pair,
)


# ---------------------------------------------------------------------------
# LPs over the metric cone, with lazily generated triangle rows


@dataclass
class MetricLpResult:
    status: str
    value: Fraction | None      # objective value, pinned constants included
    table: Metric | None        # optimal point as a full metric (pins merged)
    ray_table: Metric | None    # improving direction when unbounded (pins read 0)
    rounds: int


class MetricConeLp:
    """An LP whose variables are pair distances on m points, kept inside the
    metric cone.

    Some pairs may be pinned to constants taken from a valid metric; the
    rest are nonnegative variables. Triangle inequalities are not
    materialized up front: a separation oracle adds the violated ones
    through :func:`lp.cutting_plane`, which is measurably faster and gives
    bit-identical results.
    """

    def __init__(self, m: int, pinned: Mapping[Pair, Fraction] | None = None):
        self.m = m
        self.pinned = dict(pinned) if pinned else {}
        self.var_pairs = [pq for pq in all_pairs(m) if pq not in self.pinned]
        self.index = {pq: j for j, pq in enumerate(self.var_pairs)}

    def _full_values(self, x: Sequence[Fraction], pins_zero: bool) -> list[list[Fraction]]:
        rows = [[ZERO] * self.m for _ in range(self.m)]
        for pq, v in self.pinned.items():
            val = ZERO if pins_zero else v
            rows[pq[0]][pq[1]] = rows[pq[1]][pq[0]] = val
        for pq, j in self.index.items():
            rows[pq[0]][pq[1]] = rows[pq[1]][pq[0]] = x[j]
        return rows

    def _triangle_cuts(self, values: list[list[Fraction]]) -> list[lp.Constraint]:
        cuts = []
        for a, b, c in itertools.combinations(range(self.m), 3):
            for i, j, l in ((a, b, c), (a, c, b), (b, c, a)):
                if values[i][j] > values[i][l] + values[l][j]:
                    coeffs: dict[int, Fraction] = {}
                    rhs = ZERO
                    for key, sgn in ((pair(i, j), 1), (pair(i, l), -1), (pair(l, j), -1)):
                        if key in self.index:
                            coeffs[self.index[key]] = coeffs.get(self.index[key], ZERO) + sgn
                        else:
                            rhs -= sgn * self.pinned[key]
                    cuts.append(lp.Constraint(coeffs, lp.LE, rhs))
        return cuts

    def optimize(
        self,
        sense: str,
        objective: Mapping[Pair, Fraction],
        extra_rows: Iterable[tuple[Mapping[Pair, Fraction], str, Fraction]] = (),
    ) -> MetricLpResult:
        """Optimize a linear objective over the (pinned) metric cone.

        ``objective`` and each extra row are keyed by pair; coefficients on
        pinned pairs become constants. Returns the exact optimum with a full
        metric witness, or an improving ray direction when unbounded.
        """
        if not self.var_pairs:
            # fully pinned (or single-point) cone: the program is a constant
            table = Metric(self._full_values([], pins_zero=False))
            value = sum((c * table.dist(*pq) for pq, c in objective.items()), ZERO)
            for coeffs, rel, rhs in extra_rows:
                lhs = sum((c * table.dist(*pq) for pq, c in coeffs.items()), ZERO)
                ok = lhs <= rhs if rel == lp.LE else lhs >= rhs if rel == lp.GE else lhs == rhs
                if not ok:
                    return MetricLpResult(lp.INFEASIBLE, None, None, None, 1)
            return MetricLpResult(lp.OPTIMAL, value, table, None, 1)
        program = lp.LinearProgram(len(self.var_pairs), sense)
        const = ZERO
        for pq, c in objective.items():
            if pq in self.index:
                program.set_objective_coeff(self.index[pq], c)
            else:
                const += c * self.pinned[pq]
        for coeffs, rel, rhs in extra_rows:
            row: dict[int, Fraction] = {}
            for pq, c in coeffs.items():
                if pq in self.index:
                    row[self.index[pq]] = row.get(self.index[pq], ZERO) + c
                else:
                    rhs = rhs - c * self.pinned[pq]
            program.add_constraint(row, rel, rhs)

        def oracle(out: lp.LpOutcome) -> list[lp.Constraint]:
            if out.status == lp.UNBOUNDED:
                return self._triangle_cuts(self._full_values(out.ray, pins_zero=True))
            return self._triangle_cuts(self._full_values(out.x, pins_zero=False))

        # Every cut is one of the finitely many triangle rows and never
        # repeats, so the round cap is a formality.
        result = lp.cutting_plane(program, [oracle], max_rounds=100_000)
        assert result.converged
        out = result.outcome
        if out.status == lp.OPTIMAL:
            table = Metric(self._full_values(out.x, pins_zero=False))
            return MetricLpResult(out.status, out.value + const, table, None, result.rounds)
        if out.status == lp.UNBOUNDED:
            ray = Metric(self._full_values(out.ray, pins_zero=True))
            return MetricLpResult(out.status, None, None, ray, result.rounds)
        return MetricLpResult(out.status, None, None, None, result.rounds)


# ---------------------------------------------------------------------------
# minimum metric extension


@dataclass(frozen=True)
class ExtensionResult:
    """Optimal value and an optimal extension witness."""

    value: Fraction
    witness: Metric


def min_extension(g: WeightedGraph, d_y: Metric) -> ExtensionResult:
    """Cheapest semimetric on all of g's vertices agreeing with d_y on terminals.

    d_y is indexed terminal-locally: d_y(p, q) pins the distance between
    g.terminals[p] and g.terminals[q]. The witness is a full metric whose
    restriction to the terminals reproduces d_y exactly and whose weighted
    cost equals the returned value exactly. Always attained: extensions are
    never infeasible and the nonnegative objective is never unbounded.
    """
    if d_y.size != g.k:
        raise ValueError(f"metric has {d_y.size} points but the graph has {g.k} terminals")
    pinned = {
        pair(g.terminals[p], g.terminals[q]): d_y.dist(p, q)
        for p, q in all_pairs(g.k)
    }
    cone = MetricConeLp(g.n, pinned)
    objective = {pq: w for pq, w in g.weights.items() if w}
    result = cone.optimize("min", objective)
    assert result.status == lp.OPTIMAL
    witness = result.table
    assert witness.restrict(g.terminals) == d_y
    assert alpha_cost(g, witness) == result.value
    return ExtensionResult(result.value, witness)


# ---------------------------------------------------------------------------
# terminal min cuts, via LP and via max-flow


def _max_flow(n: int, capacity: dict[tuple[int, int], Fraction], s: int, t: int) -> Fraction:
    """Exact max-flow by shortest augmenting paths (arc count bounds the
    number of augmentations, so rational capacities terminate)."""
    residual: list[dict[int, Fraction]] = [dict() for _ in range(n)]
    for (u, v), c in capacity.items():
        if c:
            residual[u][v] = residual[u].get(v, ZERO) + c
            residual[v][u] = residual[v].get(u, ZERO) + c
    flow = ZERO
    while True:
        parent: list[int | None] = [None] * n
        parent[s] = s
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if u == t:
                break
            for v, c in residual[u].items():
                if c > 0 and parent[v] is None:
                    parent[v] = u
                    queue.append(v)
        if parent[t] is None:
            return flow
        bottleneck = None
        v = t
        while v != s:
            u = parent[v]
            c = residual[u][v]
            bottleneck = c if bottleneck is None or c < bottleneck else bottleneck
            v = u
        v = t
        while v != s:
            u = parent[v]
            residual[u][v] -= bottleneck
            residual[v][u] = residual[v].get(u, ZERO) + bottleneck
            v = u
        flow += bottleneck


def min_cut_via_flow(g: WeightedGraph, side: Iterable[int]) -> Fraction:
    """Minimum weight of edges separating the terminals in ``side`` from the
    rest, non-terminals falling freely; computed by max-flow on the graph
    with each terminal group contracted to a single node.

    ``side`` holds terminal-local indices and must be a nonempty proper
    subset of 0..k-1.
    """
    side_set = set(side)
    if not side_set or len(side_set) >= g.k:
        raise ValueError("cut side must be a nonempty proper subset of the terminals")
    for p in side_set:
        if not 0 <= p < g.k:
            raise ValueError(f"terminal index {p} outside 0..{g.k - 1}")
    node_of: dict[int, int] = {}
    for p, t in enumerate(g.terminals):
        node_of[t] = 0 if p in side_set else 1
    nxt = 2
    for v in range(g.n):
        if v not in node_of:
            node_of[v] = nxt
            nxt += 1
    capacity: dict[tuple[int, int], Fraction] = {}
    for (i, j), w in g.weights.items():
        u, v = node_of[i], node_of[j]
        if u == v or not w:
            continue
        key = (u, v) if u < v else (v, u)
        capacity[key] = capacity.get(key, ZERO) + w
    return _max_flow(nxt, capacity, 0, 1)


def min_cut_via_lp(g: WeightedGraph, side: Iterable[int]) -> Fraction:
    """The same terminal min cut as the minimum extension of the cut metric."""
    return min_extension(g, cut_metric(side, g.k)).value


def min_cut_by_enumeration(g: WeightedGraph, side: Iterable[int],
                           budget: int = 1_000_000) -> Fraction:
    """Terminal min cut by brute force over all 2^(n-k) vertex bipartitions.

    Independent of both the LP and the max-flow routes, which makes it the
    tie-breaking referee in oracle cross-checks. Raises ValueError when the
    enumeration would exceed ``budget`` bipartitions.
    """
    side_set = set(side)
    if not side_set or len(side_set) >= g.k:
        raise ValueError("cut side must be a nonempty proper subset of the terminals")
    for p in side_set:
        if not 0 <= p < g.k:
            raise ValueError(f"terminal index {p} outside 0..{g.k - 1}")
    free = [v for v in range(g.n) if v not in g.terminals]
    if 1 << len(free) > budget:
        raise ValueError(
            f"enumerating 2^{len(free)} bipartitions exceeds budget {budget}")
    pinned = {g.terminals[p] for p in side_set}
    best: Fraction | None = None
    for mask in range(1 << len(free)):
        inside = pinned | {free[a] for a in range(len(free)) if mask >> a & 1}
        value = sum(
            (w for (i, j), w in g.weights.items() if (i in inside) != (j in inside)),
            ZERO,
        )
        if best is None or value < best:
            best = value
    return best


def terminal_min_cut(g: WeightedGraph, side: Iterable[int]) -> Fraction:
    """Terminal min cut computed along both routes, asserted equal.

    The LP route extends the cut metric of ``side``; the combinatorial
    route contracts and runs max-flow. They must agree exactly; a mismatch
    is a solver bug, not data dependent.
    """
    side = list(side)
    via_lp = min_cut_via_lp(g, side)
    via_flow = min_cut_via_flow(g, side)
    assert via_lp == via_flow, (
        f"terminal min cut mismatch on side {sorted(set(side))}: "
        f"LP {via_lp} vs max-flow {via_flow}")
    return via_flow


# ---------------------------------------------------------------------------
# exhaustive 0-extension


@dataclass(frozen=True)
class ZeroExtension:
    """A vertex-to-terminal collapse and its weighted cost.

    ``assignment[v]`` is the terminal-local index vertex v maps to;
    terminals map to themselves.
    """

    cost: Fraction
    assignment: tuple[int, ...]


def best_zero_extension(g: WeightedGraph, d_y: Metric,
                        budget: int = 10_000_000) -> ZeroExtension:
    """Cheapest 0-extension by exhaustive enumeration of k^(n-k) assignments.

    Ties break to the lexicographically smallest assignment, so the result
    is deterministic. Raises ValueError when the enumeration would exceed
    ``budget`` assignments. The cost always dominates min_extension(g, d_y).
    """
    if d_y.size != g.k:
        raise ValueError(f"metric has {d_y.size} points but the graph has {g.k} terminals")
    free = [v for v in range(g.n) if v not in set(g.terminals)]
    count = g.k ** len(free)
    if count > budget:
        raise ValueError(
            f"0-extension enumeration needs {count} assignments, over the budget of {budget}")
    local = {t: p for p, t in enumerate(g.terminals)}
    edges = [(i, j, w) for (i, j), w in g.weights.items() if w]
    best_cost: Fraction | None = None
    best_assignment: tuple[int, ...] | None = None
    for choice in itertools.product(range(g.k), repeat=len(free)):
        f = dict(zip(free, choice))
        f.update(local)
        cost = ZERO
        for i, j, w in edges:
            fi, fj = f[i], f[j]
            if fi != fj:
                cost += w * d_y.dist(fi, fj)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_assignment = tuple(f[v] for v in range(g.n))
    return ZeroExtension(best_cost, best_assignment)
