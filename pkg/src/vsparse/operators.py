"""Metric extension operators and the exact optimal-distortion solve.

An extension operator is a nonnegative tensor phi taking a terminal metric
d_Y to a vertex metric phi(d_Y) that extends it; its distortion Q is the
worst ratio of the weighted cost of phi(d_Y) to the minimum extension cost
of d_Y. The optimal operator is found by a master LP over (phi, Q) with two
lazy separation families:

* membership cuts force every triangle row of the image cone, maximizing
  each row over the normalized metric polytope on the terminals;
* distortion cuts bound the image cost against Q times the exact minimum
  extension of the restricted witness metric.

Everything runs in exact rational arithmetic, so the converged master value
is the true optimum, not an approximation. Operators index vertices in the
canonical order (terminals first); :func:`find_optimal_operator`
relabels its input accordingly and reports the relabeling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from . import jsonio, lp
from .core import (
    ONE,
    ZERO,
    FractionLike,
    Metric,
    Pair,
    Sparsifier,
    WeightedGraph,
    all_pairs,
    as_fraction,
    canonicalize,
    cut_metric,
    pair,
)
from .extension import MetricConeLp, min_extension

PhiAccessor = Callable[[Pair, Pair], Fraction]


class NoFiniteDistortionError(RuntimeError):
    """No operator of finite distortion exists under these weights."""


@dataclass(frozen=True, eq=True)
class ExtensionOperator:
    """A nonnegative tensor phi_{ipjq}, keyed by (X-pair, Y-pair).

    X-pairs are canonical unordered vertex pairs with terminals at indices
    0..k-1; Y-pairs are terminal-local. Rows of terminal pairs are the
    identity (the image must reproduce d_Y on terminals exactly); the
    constructor injects them and rejects anything contradictory. Zero
    entries are dropped, so equality of operators is equality of tensors.
    """

    n: int
    k: int
    coeffs: dict[tuple[Pair, Pair], Fraction]
    distortion: Fraction | None

    def __init__(self, n: int, k: int,
                 coeffs: Mapping[tuple[Pair, Pair], FractionLike],
                 distortion: FractionLike | None = None):
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got k = {k}, n = {n}")
        norm: dict[tuple[Pair, Pair], Fraction] = {}
        for (xp, yp), value in coeffs.items():
            xp, yp = pair(*xp), pair(*yp)
            if xp[0] < 0 or xp[1] >= n:
                raise ValueError(f"X-pair {xp} outside 0..{n - 1}")
            if yp[1] >= k:
                raise ValueError(f"Y-pair {yp} outside 0..{k - 1}")
            v = as_fraction(value)
            if v < 0:
                raise ValueError(f"coefficient of {(xp, yp)} is negative: {v}")
            if xp[1] < k and v != (ONE if xp == yp else ZERO):
                raise ValueError(
                    f"terminal row {xp} must be the identity, got {v} at {yp}")
            if v:
                norm[(xp, yp)] = v
        for tp in all_pairs(k):
            norm[(tp, tp)] = ONE
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "coeffs", norm)
        object.__setattr__(self, "distortion", None if distortion is None else as_fraction(distortion))

    def value(self, xp: Pair, yp: Pair) -> Fraction:
        return self.coeffs.get((xp, yp), ZERO)

    def __hash__(self) -> int:
        return hash((self.n, self.k, tuple(sorted(self.coeffs.items()))))


def apply(phi: ExtensionOperator, d_y: Metric) -> Metric:
    """The image metric phi(d_Y) on all n vertices.

    Raises ValueError if the image violates a metric condition, which for a
    well-formed phi means it is not a member of the operator cone.
    """
    if d_y.size != phi.k:
        raise ValueError(f"metric has {d_y.size} points, operator expects {phi.k}")
    table = [[ZERO] * phi.n for _ in range(phi.n)]
    for ((i, j), yp), c in phi.coeffs.items():
        v = c * d_y.rows[yp[0]][yp[1]]
        if v:
            table[i][j] += v
            table[j][i] += v
    return Metric(table)


def operator_to_sparsifier(phi: ExtensionOperator, g: WeightedGraph) -> Sparsifier:
    """Collapse an operator against edge weights: beta_pq = sum alpha_ij phi_{ipjq}.

    ``g`` must be the canonical graph the operator was built for.
    """
    _require_canonical(phi, g)
    beta: dict[Pair, Fraction] = {}
    for (xp, yp), c in phi.coeffs.items():
        w = g.weights.get(xp, ZERO)
        if w and c:
            beta[yp] = beta.get(yp, ZERO) + w * c
    return Sparsifier(phi.k, beta)


def zero_extension_operator(n: int, k: int, assignment: Sequence[int]) -> ExtensionOperator:
    """The operator of a vertex collapse f: phi(d)(i, j) = d(f(i), f(j)).

    ``assignment[v]`` is a terminal-local index; terminals must map to
    themselves. Always a member of the operator cone, which makes these the
    classic comparison family for solver dominance checks.
    """
    if len(assignment) != n:
        raise ValueError(f"assignment has {len(assignment)} entries, expected {n}")
    for v, p in enumerate(assignment):
        if not 0 <= p < k:
            raise ValueError(f"assignment[{v}] = {p} outside 0..{k - 1}")
        if v < k and p != v:
            raise ValueError(f"terminal {v} must map to itself, got {p}")
    coeffs: dict[tuple[Pair, Pair], Fraction] = {}
    for i, j in all_pairs(n):
        if j < k:
            continue  # identity rows are injected by the constructor
        fi, fj = assignment[i], assignment[j]
        if fi != fj:
            coeffs[((i, j), pair(fi, fj))] = ONE
    return ExtensionOperator(n, k, coeffs)


def _require_canonical(phi: ExtensionOperator, g: WeightedGraph) -> None:
    if not g.is_canonical():
        raise ValueError("operator arithmetic expects the canonical graph (terminals first); "
                         "use core.canonicalize")
    if g.n != phi.n or g.k != phi.k:
        raise ValueError(f"operator is {phi.n}/{phi.k} but graph is {g.n}/{g.k}")


def _image_alpha(g: WeightedGraph, phi_of: PhiAccessor, d_y: Metric) -> Fraction:
    """alpha(phi(d_Y)) evaluated without building the image metric."""
    ypairs = all_pairs(d_y.size)
    total = ZERO
    for xp, w in g.weights.items():
        if not w:
            continue
        for yp in ypairs:
            dv = d_y.rows[yp[0]][yp[1]]
            if dv:
                c = phi_of(xp, yp)
                if c:
                    total += w * c * dv
    return total


# ---------------------------------------------------------------------------
# separation oracles


@dataclass(frozen=True)
class MembershipViolation:
    """A defining row of the vertex metric cone the candidate image fails.

    ``kind`` is "triangle" with ``where`` = (i, j, l) naming the row
    d(i,j) <= d(i,l) + d(l,j), or "nonneg" with ``where`` = (i, j) naming
    d(i,j) >= 0. On the witness terminal metric (normalized to total pair
    mass 1) the image violates the row by ``excess`` > 0.
    """

    kind: str
    where: tuple[int, ...]
    witness: Metric
    excess: Fraction


def _membership_violations(n: int, k: int, phi_of: PhiAccessor,
                           first_only: bool) -> list[MembershipViolation]:
    if k < 2:
        return []  # a single terminal admits only the zero metric
    ypairs = all_pairs(k)
    norm_row = ({yp: ONE for yp in ypairs}, lp.EQ, ONE)
    found: list[MembershipViolation] = []

    def probe(kind: str, where: tuple[int, ...], coeffs: dict[Pair, Fraction]) -> bool:
        if all(v <= 0 for v in coeffs.values()):
            return False  # nonnegative metrics cannot push this row positive
        cone = MetricConeLp(k)
        result = cone.optimize("max", coeffs, [norm_row])
        assert result.status == lp.OPTIMAL
        if result.value > 0:
            found.append(MembershipViolation(kind, where, result.table, result.value))
            return True
        return False

    for i, j in all_pairs(n):
        if j >= k:
            # Nonnegativity row -phi(d)(i,j) <= 0; rows of terminal pairs
            # reproduce a d_Y value and cannot go negative.
            coeffs = {yp: -phi_of(pair(i, j), yp) for yp in ypairs}
            if probe("nonneg", (i, j), coeffs) and first_only:
                return found
        for l in range(n):
            if l == i or l == j:
                continue
            if j < k and l < k:
                continue  # row between terminal pairs holds by the identity
            coeffs = {}
            for key, sgn in ((pair(i, j), 1), (pair(i, l), -1), (pair(l, j), -1)):
                for yp in ypairs:
                    c = phi_of(key, yp)
                    if c:
                        coeffs[yp] = coeffs.get(yp, ZERO) + sgn * c
            if probe("triangle", (i, j, l), coeffs) and first_only:
                return found
    return found


def membership_oracle(phi: ExtensionOperator) -> MembershipViolation | None:
    """Is phi(D_Y) inside the metric cone on the vertices?

    Separates on every defining row of the cone: all triangle inequalities
    and all nonnegativity rows of the image. For a nonnegative tensor the
    nonnegativity rows can never fire and their sub-LPs are skipped by a
    sign prefilter, so they cost nothing. Returns None for members,
    otherwise the first violated row with its witness metric.
    """
    hits = _membership_violations(phi.n, phi.k, phi.value, first_only=True)
    return hits[0] if hits else None


@dataclass(frozen=True)
class DistortionViolation:
    """A normalized vertex metric on which the candidate overshoots Q.

    ``restricted`` is its terminal restriction d_Y*, ``min_extension_value``
    the exact minext(d_Y*), and ``image_cost`` = alpha(phi(d_Y*)), which
    exceeds Q * min_extension_value.
    """

    witness: Metric
    restricted: Metric
    min_extension_value: Fraction
    image_cost: Fraction


def _distortion_witness(g: WeightedGraph, phi_of: PhiAccessor,
                        q: Fraction) -> tuple[Metric, Fraction] | None:
    """Maximize alpha(phi(d|_Y)) - q * alpha(d) over the normalized metric
    polytope on the vertices; a positive optimum witnesses excess distortion."""
    n, k = g.n, g.k
    if n < 2:
        return None  # a single point carries no nonzero metric
    objective: dict[Pair, Fraction] = {}
    for xp, w in g.weights.items():
        if not w:
            continue
        objective[xp] = objective.get(xp, ZERO) - q * w
        for yp in all_pairs(k):
            c = phi_of(xp, yp)
            if c:
                objective[yp] = objective.get(yp, ZERO) + w * c
    cone = MetricConeLp(n)
    norm_row = ({xp: ONE for xp in all_pairs(n)}, lp.EQ, ONE)
    result = cone.optimize("max", objective, [norm_row])
    assert result.status == lp.OPTIMAL
    if result.value > 0:
        return result.table, result.value
    return None


def distortion_oracle(phi: ExtensionOperator, q: Fraction,
                      g: WeightedGraph) -> DistortionViolation | None:
    """Does some terminal metric stretch beyond q times its minimum extension?

    ``phi`` must be a member of the operator cone and ``g`` the canonical
    graph it was built for. Returns None when alpha(phi(d_Y)) <= q *
    minext(d_Y) holds for every d_Y.
    """
    _require_canonical(phi, g)
    hit = _distortion_witness(g, phi.value, as_fraction(q))
    if hit is None:
        return None
    witness, _ = hit
    restricted = witness.restrict(range(phi.k))
    c_star = min_extension(g, restricted).value
    image = _image_alpha(g, phi.value, restricted)
    return DistortionViolation(witness, restricted, c_star, image)


# ---------------------------------------------------------------------------
# the optimal-operator master program


@dataclass
class OperatorSolveReport:
    """Everything the cutting-plane solve produced.

    ``worst_metrics`` lists the recorded terminal metrics whose distortion
    constraints are binding at the final solution, paired with their exact
    minimum extension values; they certify the optimum. ``graph`` is the
    canonical relabeling actually solved and ``order[new] = old`` maps its
    vertices back to the input.
    """

    operator: ExtensionOperator
    q: Fraction
    converged: bool
    iterations: int
    membership_cuts: int
    distortion_cuts: int
    worst_metrics: list[tuple[Metric, Fraction]]
    graph: WeightedGraph
    order: tuple[int, ...]


def _raw_operator(n: int, k: int, coeffs: Mapping[tuple[Pair, Pair], Fraction],
                  distortion: Fraction) -> ExtensionOperator:
    """Build without the nonnegativity check; only for the exploration path
    that deliberately relaxes phi >= 0. Such operators may be rejected by
    downstream conversions and do not round-trip through the wire format."""
    phi = object.__new__(ExtensionOperator)
    norm = {key: v for key, v in coeffs.items() if v}
    for tp in all_pairs(k):
        norm[(tp, tp)] = ONE
    object.__setattr__(phi, "n", n)
    object.__setattr__(phi, "k", k)
    object.__setattr__(phi, "coeffs", norm)
    object.__setattr__(phi, "distortion", distortion)
    return phi


def find_optimal_operator(g: WeightedGraph, max_iters: int = 10_000,
                          allow_negative: bool = False) -> OperatorSolveReport:
    """Minimize distortion over all extension operators of g, exactly.

    The master LP minimizes Q over (phi, Q) >= 0. It starts from the
    distortion constraints of all cut metrics (their minimum extensions are
    terminal min cuts, cheap and binding surprisingly often) and then
    alternates the two separation families, membership before distortion so
    no minimum extension is ever computed against a non-member candidate.
    With exact arithmetic every witness is a vertex of a fixed polytope, so
    the loop terminates; ``max_iters`` caps the rounds anyway and a capped
    run returns ``converged=False`` carrying the best master iterate.

    ``allow_negative`` lifts the phi >= 0 bounds for exploration; the
    membership oracle then also separates on image nonnegativity rows.
    Nothing is asserted about the result beyond the master constraints, and
    the returned operator may fail downstream conversions.
    """
    g_c, order = canonicalize(g)
    n, k = g_c.n, g_c.k
    ypairs = all_pairs(k)
    entries = [(xp, yp) for xp in all_pairs(n) if xp[1] >= k for yp in ypairs]
    position = {entry: 1 + e for e, entry in enumerate(entries)}

    def phi_of_x(x: Sequence[Fraction]) -> PhiAccessor:
        def phi_of(xp: Pair, yp: Pair) -> Fraction:
            if xp[1] < k:
                return ONE if xp == yp else ZERO
            return x[position[(xp, yp)]]
        return phi_of

    def distortion_cut(d_y: Metric, c_star: Fraction) -> lp.Constraint:
        # alpha(phi(d_y)) <= Q * c_star, terminal rows folded into the rhs
        coeffs: dict[int, Fraction] = {0: -c_star}
        rhs = ZERO
        for xp, w in g_c.weights.items():
            if not w:
                continue
            if xp[1] < k:
                rhs -= w * d_y.rows[xp[0]][xp[1]]
                continue
            for yp in ypairs:
                dv = d_y.rows[yp[0]][yp[1]]
                if dv:
                    e = position[(xp, yp)]
                    coeffs[e] = coeffs.get(e, ZERO) + w * dv
        if c_star == 0:
            # A zero-cost witness zeroes every positive-weight terminal pair,
            # so the cut keeps a satisfiable zero right-hand side; see the
            # no-finite-distortion handling below for the infeasible case.
            assert rhs == 0
            del coeffs[0]
        return lp.Constraint(coeffs, lp.LE, rhs)

    def membership_cut(hit: MembershipViolation) -> lp.Constraint:
        witness = hit.witness
        if hit.kind == "nonneg":
            # phi(d*)(i,j) >= 0; the pair is never terminal-terminal here
            coeffs = {}
            for yp in ypairs:
                dv = witness.rows[yp[0]][yp[1]]
                if dv:
                    coeffs[position[(hit.where, yp)]] = dv
            return lp.Constraint(coeffs, lp.GE, ZERO)
        i, j, l = hit.where
        coeffs = {}
        rhs = ZERO
        for key, sgn in ((pair(i, j), 1), (pair(i, l), -1), (pair(l, j), -1)):
            if key[1] < k:
                rhs -= sgn * witness.rows[key[0]][key[1]]
                continue
            for yp in ypairs:
                dv = witness.rows[yp[0]][yp[1]]
                if dv:
                    e = position[(key, yp)]
                    coeffs[e] = coeffs.get(e, ZERO) + sgn * dv
        return lp.Constraint(coeffs, lp.LE, rhs)

    master = lp.LinearProgram(1 + len(entries), "min", {0: ONE})
    if allow_negative:
        for e in range(1, master.n_vars):
            master.set_free(e)
    candidates: list[tuple[Metric, Fraction]] = []
    counts = {"membership": 0, "distortion": 0}

    full = (1 << k) - 1
    for mask in range(1, full):
        if not mask & 1:
            continue  # complements give the same cut metric
        delta = cut_metric([p for p in range(k) if mask >> p & 1], k)
        c_s = min_extension(g_c, delta).value
        candidates.append((delta, c_s))
        warm = distortion_cut(delta, c_s)
        master.add_constraint(warm.coeffs, warm.rel, warm.rhs)

    def membership_cb(out: lp.LpOutcome) -> list[lp.Constraint]:
        phi_of = phi_of_x(out.x)
        hits = _membership_violations(n, k, phi_of, first_only=False)
        counts["membership"] += len(hits)
        return [membership_cut(hit) for hit in hits]

    def distortion_cb(out: lp.LpOutcome) -> list[lp.Constraint]:
        phi_of = phi_of_x(out.x)
        hit = _distortion_witness(g_c, phi_of, out.x[0])
        if hit is None:
            return []
        witness, _ = hit
        restricted = witness.restrict(range(k))
        c_star = min_extension(g_c, restricted).value
        candidates.append((restricted, c_star))
        counts["distortion"] += 1
        return [distortion_cut(restricted, c_star)]

    result = lp.cutting_plane(master, [membership_cb, distortion_cb], max_rounds=max_iters)
    if result.outcome.status == lp.INFEASIBLE:
        raise NoFiniteDistortionError(
            "no operator of finite distortion exists under these weights")
    x = result.outcome.x
    q = x[0]
    coeffs = {entry: x[position[entry]] for entry in entries if x[position[entry]]}
    if allow_negative and any(v < 0 for v in coeffs.values()):
        phi = _raw_operator(n, k, coeffs, q)
    else:
        phi = ExtensionOperator(n, k, coeffs, distortion=q)
    phi_of = phi_of_x(x)
    worst = [(d, c) for d, c in candidates if _image_alpha(g_c, phi_of, d) == q * c]
    return OperatorSolveReport(
        operator=phi,
        q=q,
        converged=result.converged,
        iterations=result.rounds,
        membership_cuts=counts["membership"],
        distortion_cuts=counts["distortion"],
        worst_metrics=worst,
        graph=g_c,
        order=order,
    )


# ---------------------------------------------------------------------------
# wire format


def operator_to_json(phi: ExtensionOperator) -> dict:
    """Spec wire form; requires a recorded distortion."""
    if phi.distortion is None:
        raise ValueError("operator has no recorded distortion; evaluate it first")
    rows = [
        [xp[0], xp[1], yp[0], yp[1], jsonio.format_fraction(c)]
        for (xp, yp), c in sorted(phi.coeffs.items())
    ]
    return {
        "n": phi.n,
        "k": phi.k,
        "Q": jsonio.format_fraction(phi.distortion),
        "coeffs": rows,
    }


def operator_from_json(data: object, path: str = "operator") -> ExtensionOperator:
    obj = jsonio._expect_object(data, path, ("n", "k", "Q", "coeffs"))
    n = jsonio._expect_int(obj["n"], f"{path}.n")
    k = jsonio._expect_int(obj["k"], f"{path}.k")
    q = jsonio.parse_fraction(obj["Q"], f"{path}.Q")
    coeffs: dict[tuple[Pair, Pair], Fraction] = {}
    for a, entry in enumerate(jsonio._expect_list(obj["coeffs"], f"{path}.coeffs")):
        epath = f"{path}.coeffs[{a}]"
        row = jsonio._expect_list(entry, epath)
        if len(row) != 5:
            raise jsonio.JsonFormatError(epath, f"expected [i, j, p, q, value], got {len(row)} items")
        i, j, p, qq = (jsonio._expect_int(row[t], f"{epath}[{t}]") for t in range(4))
        key = ((i, j), (p, qq))
        if key in coeffs:
            raise jsonio.JsonFormatError(epath, f"duplicate coefficient for {key}")
        coeffs[key] = jsonio.parse_fraction(row[4], f"{epath}[4]")
    try:
        return ExtensionOperator(n, k, coeffs, distortion=q)
    except ValueError as exc:
        raise jsonio.JsonFormatError(path, str(exc)) from None
