"""Exact rational linear programming and a lazy-constraint driver.

A small two-phase primal simplex over ``fractions.Fraction`` with Bland's
anti-cycling rule, so every solve is deterministic and every certificate is
bit-exact. Outcomes carry primal solutions, dual multipliers satisfying
strong duality and complementary slackness exactly, and improving rays for
unbounded programs. :func:`audit` re-verifies all of that from scratch and
is switched on liberally in the test suite.

Dual conventions, stated once and enforced by :func:`audit`:

* sense ``min``: duals are >= 0 on ">=" rows, <= 0 on "<=" rows, free on
  "=" rows; reduced costs ``c_j - y.A_j - ubdual_j`` are >= 0 on x_j >= 0
  and 0 on free variables.
* sense ``max``: duals are >= 0 on "<=" rows, <= 0 on ">=" rows, free on
  "=" rows; reduced costs are <= 0 on x_j >= 0 and 0 on free variables.
* ``bound_duals[j]`` is the multiplier of the implicit row ``x_j <= u_j``
  and follows the "<=" convention of the sense.

Strong duality reads ``value = sum_r duals[r] * rhs_r + sum_j bound_duals[j] * u_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Mapping, Sequence

from .core import ONE, ZERO, FractionLike, as_fraction

LE, GE, EQ = "<=", ">=", "="
_RELATIONS = (LE, GE, EQ)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(ValueError):
    """Malformed linear program."""


class LpAuditError(AssertionError):
    """An exact post-solve check failed; this always signals a solver bug."""


class CuttingPlaneError(RuntimeError):
    """The lazy-constraint loop detected an oracle exactness bug."""


@dataclass
class Constraint:
    """A sparse linear row ``sum coeffs[j] * x_j  rel  rhs``."""

    coeffs: dict[int, Fraction]
    rel: str
    rhs: Fraction

    def evaluate(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * x[j] for j, c in self.coeffs.items()), ZERO)

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        lhs = self.evaluate(x)
        if self.rel == LE:
            return lhs <= self.rhs
        if self.rel == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


class LinearProgram:
    """A linear program over exact rationals.

    Variables are indexed 0..n_vars-1 with default bounds ``0 <= x_j``.
    Call :meth:`set_free` for a (-inf, +inf) variable and :meth:`set_upper`
    for a finite upper bound. Constraints are added in a fixed order that,
    together with Bland's rule, makes every solve deterministic.
    """

    def __init__(self, n_vars: int, sense: str = "min",
                 objective: Mapping[int, FractionLike] | None = None):
        if n_vars < 0:
            raise LpError(f"n_vars must be nonnegative, got {n_vars}")
        if sense not in ("min", "max"):
            raise LpError(f"sense must be 'min' or 'max', got {sense!r}")
        self.n_vars = n_vars
        self.sense = sense
        self.objective: dict[int, Fraction] = {}
        if objective:
            for j, c in objective.items():
                self.set_objective_coeff(j, c)
        self.constraints: list[Constraint] = []
        self.lower: list[Fraction | None] = [ZERO] * n_vars  # None means -inf
        self.upper: list[Fraction | None] = [None] * n_vars  # None means +inf

    def _check_var(self, j: int) -> None:
        if not 0 <= j < self.n_vars:
            raise LpError(f"variable index {j} outside 0..{self.n_vars - 1}")

    def set_objective_coeff(self, j: int, c: FractionLike) -> None:
        self._check_var(j)
        c = as_fraction(c)
        if c:
            self.objective[j] = c
        else:
            self.objective.pop(j, None)

    def set_free(self, j: int) -> None:
        self._check_var(j)
        self.lower[j] = None

    def set_upper(self, j: int, u: FractionLike) -> None:
        self._check_var(j)
        self.upper[j] = as_fraction(u)

    def add_constraint(self, coeffs: Mapping[int, FractionLike], rel: str,
                       rhs: FractionLike) -> int:
        if rel not in _RELATIONS:
            raise LpError(f"relation must be one of {_RELATIONS}, got {rel!r}")
        row: dict[int, Fraction] = {}
        for j, c in coeffs.items():
            self._check_var(j)
            c = as_fraction(c)
            if c:
                row[j] = c
        self.constraints.append(Constraint(row, rel, as_fraction(rhs)))
        return len(self.constraints) - 1


@dataclass
class LpOutcome:
    """Result of an exact solve.

    status "optimal": x, value, duals (one per constraint) and bound_duals
    (one per variable, 0 without a finite upper bound) are set.
    status "unbounded": x is a feasible point and ray an improving feasible
    direction from it. status "infeasible": everything else is None.
    """

    status: str
    x: list[Fraction] | None = None
    value: Fraction | None = None
    duals: list[Fraction] | None = None
    bound_duals: list[Fraction] | None = None
    ray: list[Fraction] | None = None


# ---------------------------------------------------------------------------
# simplex core


class _Tableau:
    """Dense simplex tableau over Fractions; rhs lives in the last column."""

    def __init__(self, rows: list[list[Fraction]], basis: list[int], ncols: int):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols  # structural + slack + artificial, excluding rhs

    def pivot(self, pr: int, pc: int, red: list[Fraction]) -> None:
        prow = self.rows[pr]
        piv = prow[pc]
        if piv != 1:
            inv = ONE / piv
            for idx, v in enumerate(prow):
                if v:
                    prow[idx] = v * inv
        nz = [idx for idx, v in enumerate(prow) if v]
        for row in self.rows:
            if row is prow:
                continue
            f = row[pc]
            if f:
                for idx in nz:
                    row[idx] -= f * prow[idx]
        f = red[pc]
        if f:
            for idx in nz:
                if idx < self.ncols:
                    red[idx] -= f * prow[idx]
        self.basis[pr] = pc

    def reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        red = list(cost)
        for r, row in enumerate(self.rows):
            cb = cost[self.basis[r]]
            if cb:
                for idx in range(self.ncols):
                    if row[idx]:
                        red[idx] -= cb * row[idx]
        return red

    def run(self, cost: list[Fraction], enterable: Sequence[bool]) -> tuple[str, list[Fraction], int | None]:
        """Bland-rule simplex to optimality; returns (status, reduced costs, entering col).

        status "optimal" means no enterable column has negative reduced cost;
        "unbounded" reports the entering column whose ratio test found no
        blocking row.
        """
        red = self.reduced_costs(cost)
        rows, basis = self.rows, self.basis
        while True:
            pc = -1
            for idx in range(self.ncols):
                if enterable[idx] and red[idx] < 0:
                    pc = idx
                    break
            if pc < 0:
                return OPTIMAL, red, None
            pr = -1
            best: Fraction | None = None
            for r, row in enumerate(rows):
                a = row[pc]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and basis[r] < basis[pr]):
                        pr, best = r, ratio
            if pr < 0:
                return UNBOUNDED, red, pc
            self.pivot(pr, pc, red)


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve exactly; see module docstring for the outcome conventions."""
    if lp.n_vars == 0:
        raise LpError("program has no variables")
    minimize = lp.sense == "min"

    # Internal rows: user constraints then one "x_j <= u_j" row per bounded var.
    internal: list[tuple[dict[int, Fraction], str, Fraction, str, int]] = []
    for r, con in enumerate(lp.constraints):
        internal.append((con.coeffs, con.rel, con.rhs, "user", r))
    for j in range(lp.n_vars):
        u = lp.upper[j]
        if u is not None:
            internal.append(({j: ONE}, LE, u, "bound", j))

    # Column layout: positive part per variable, then negative parts of free vars.
    pos_col = list(range(lp.n_vars))
    neg_col: list[int | None] = [None] * lp.n_vars
    ncols = lp.n_vars
    for j in range(lp.n_vars):
        if lp.lower[j] is None:
            neg_col[j] = ncols
            ncols += 1
    n_struct = ncols

    slack_of: dict[int, int] = {}
    art_of: dict[int, int] = {}
    flipped: list[bool] = []
    kinds: list[str] = []
    for r, (coeffs, rel, rhs, _, _) in enumerate(internal):
        flip = rhs < 0
        eff = rel if not flip else {LE: GE, GE: LE, EQ: EQ}[rel]
        flipped.append(flip)
        kinds.append(eff)
        if eff == LE:
            slack_of[r] = ncols
            ncols += 1
        elif eff == GE:
            slack_of[r] = ncols
            ncols += 1
            art_of[r] = ncols
            ncols += 1
        else:
            art_of[r] = ncols
            ncols += 1

    m = len(internal)
    rows: list[list[Fraction]] = []
    basis: list[int] = []
    for r, (coeffs, rel, rhs, _, _) in enumerate(internal):
        sgn = -ONE if flipped[r] else ONE
        row = [ZERO] * (ncols + 1)
        for j, c in coeffs.items():
            row[pos_col[j]] += sgn * c
            if neg_col[j] is not None:
                row[neg_col[j]] -= sgn * c
        row[-1] = sgn * rhs
        eff = kinds[r]
        if eff == LE:
            row[slack_of[r]] = ONE
            basis.append(slack_of[r])
        elif eff == GE:
            row[slack_of[r]] = -ONE
            row[art_of[r]] = ONE
            basis.append(art_of[r])
        else:
            row[art_of[r]] = ONE
            basis.append(art_of[r])
        rows.append(row)

    tab = _Tableau(rows, basis, ncols)
    artificial = [False] * ncols
    for col in art_of.values():
        artificial[col] = True

    # Internal objective: minimize (negated for max), on structural columns.
    cost2 = [ZERO] * ncols
    for j, c in lp.objective.items():
        c = c if minimize else -c
        cost2[pos_col[j]] += c
        if neg_col[j] is not None:
            cost2[neg_col[j]] -= c

    row_ids = list(range(m))  # tableau row -> internal row

    if art_of:
        cost1 = [ONE if artificial[idx] else ZERO for idx in range(ncols)]
        enterable = [True] * ncols
        status, _, _ = tab.run(cost1, enterable)
        assert status == OPTIMAL  # phase one is always bounded below by zero
        if any(artificial[tab.basis[r]] and tab.rows[r][-1] != 0
               for r in range(len(tab.rows))):
            return LpOutcome(INFEASIBLE)
        # Drive artificials out of the basis; drop rows proven redundant.
        red1 = tab.reduced_costs(cost1)
        drop: list[int] = []
        for r in range(len(tab.rows)):
            if not artificial[tab.basis[r]]:
                continue
            row = tab.rows[r]
            pc = next((idx for idx in range(ncols)
                       if not artificial[idx] and row[idx]), None)
            if pc is None:
                drop.append(r)
            else:
                tab.pivot(r, pc, red1)
        for r in reversed(drop):
            del tab.rows[r]
            del tab.basis[r]
            del row_ids[r]

    enterable = [not artificial[idx] for idx in range(ncols)]
    status, red, enter_col = tab.run(cost2, enterable)

    def structural_solution() -> list[Fraction]:
        sf = [ZERO] * ncols
        for r, b in enumerate(tab.basis):
            sf[b] = tab.rows[r][-1]
        x = []
        for j in range(lp.n_vars):
            v = sf[pos_col[j]]
            if neg_col[j] is not None:
                v -= sf[neg_col[j]]
            x.append(v)
        return x

    x = structural_solution()
    value = sum((c * x[j] for j, c in lp.objective.items()), ZERO)

    if status == UNBOUNDED:
        assert enter_col is not None
        direction = [ZERO] * ncols
        direction[enter_col] = ONE
        for r, row in enumerate(tab.rows):
            if row[enter_col]:
                direction[tab.basis[r]] = -row[enter_col]
        ray = []
        for j in range(lp.n_vars):
            v = direction[pos_col[j]]
            if neg_col[j] is not None:
                v -= direction[neg_col[j]]
            ray.append(v)
        return LpOutcome(UNBOUNDED, x=x, value=value, ray=ray)

    # Duals from the reduced costs of the identity-seeded column of each row.
    y_internal = [ZERO] * m
    kept = set(row_ids)
    for r in range(m):
        if r not in kept:
            continue  # redundant row, multiplier zero
        if kinds[r] == LE:
            y = -red[slack_of[r]]
        elif kinds[r] == GE:
            y = red[slack_of[r]]  # surplus column is -e_r
        else:
            y = -red[art_of[r]]
        if flipped[r]:
            y = -y
        y_internal[r] = y if minimize else -y

    duals = [ZERO] * len(lp.constraints)
    bound_duals = [ZERO] * lp.n_vars
    for r, (_, _, _, kind, idx) in enumerate(internal):
        if kind == "user":
            duals[idx] = y_internal[r]
        else:
            bound_duals[idx] = y_internal[r]
    return LpOutcome(OPTIMAL, x=x, value=value, duals=duals, bound_duals=bound_duals)


# ---------------------------------------------------------------------------
# post-solve audit


def _check(ok: bool, message: str) -> None:
    if not ok:
        raise LpAuditError(message)


def audit(lp: LinearProgram, out: LpOutcome) -> None:
    """Re-verify an outcome exactly: feasibility, duality, slackness, rays.

    Raises :class:`LpAuditError` on the first failed check. "infeasible"
    outcomes carry no certificate and are accepted as-is.
    """
    if out.status == INFEASIBLE:
        return
    _check(out.x is not None and out.value is not None, "missing primal data")
    x = out.x
    _check(len(x) == lp.n_vars, "primal solution has wrong length")
    for j in range(lp.n_vars):
        if lp.lower[j] is not None:
            _check(x[j] >= 0, f"x[{j}] = {x[j]} below lower bound 0")
        if lp.upper[j] is not None:
            _check(x[j] <= lp.upper[j], f"x[{j}] = {x[j]} above upper bound {lp.upper[j]}")
    for r, con in enumerate(lp.constraints):
        _check(con.satisfied_by(x), f"constraint {r} violated")
    value = sum((c * x[j] for j, c in lp.objective.items()), ZERO)
    _check(value == out.value, "objective value mismatch")

    if out.status == UNBOUNDED:
        ray = out.ray
        _check(ray is not None and len(ray) == lp.n_vars, "missing or malformed ray")
        for j in range(lp.n_vars):
            if lp.lower[j] is not None:
                _check(ray[j] >= 0, f"ray[{j}] leaves the lower bound")
            if lp.upper[j] is not None:
                _check(ray[j] <= 0, f"ray[{j}] leaves the upper bound {lp.upper[j]}")
        for r, con in enumerate(lp.constraints):
            along = sum((c * ray[j] for j, c in con.coeffs.items()), ZERO)
            if con.rel == LE:
                _check(along <= 0, f"ray violates constraint {r}")
            elif con.rel == GE:
                _check(along >= 0, f"ray violates constraint {r}")
            else:
                _check(along == 0, f"ray violates equality {r}")
        gain = sum((c * ray[j] for j, c in lp.objective.items()), ZERO)
        if lp.sense == "min":
            _check(gain < 0, "ray does not improve a minimization")
        else:
            _check(gain > 0, "ray does not improve a maximization")
        return

    duals, bound_duals = out.duals, out.bound_duals
    _check(duals is not None and len(duals) == len(lp.constraints), "missing duals")
    _check(bound_duals is not None and len(bound_duals) == lp.n_vars, "missing bound duals")
    minimize = lp.sense == "min"
    for r, con in enumerate(lp.constraints):
        y = duals[r]
        if con.rel == EQ:
            pass
        elif (con.rel == GE) == minimize:
            _check(y >= 0, f"dual {r} has wrong sign")
        else:
            _check(y <= 0, f"dual {r} has wrong sign")
        _check(y * (con.evaluate(x) - con.rhs) == 0, f"complementary slackness fails on row {r}")
    for j in range(lp.n_vars):
        yb = bound_duals[j]
        if lp.upper[j] is None:
            _check(yb == 0, f"bound dual {j} set without an upper bound")
        else:
            if minimize:
                _check(yb <= 0, f"bound dual {j} has wrong sign")
            else:
                _check(yb >= 0, f"bound dual {j} has wrong sign")
            _check(yb * (x[j] - lp.upper[j]) == 0, f"complementary slackness fails on bound {j}")
    for j in range(lp.n_vars):
        rc = lp.objective.get(j, ZERO) - bound_duals[j]
        rc -= sum((con.coeffs[j] * duals[r] for r, con in enumerate(lp.constraints)
                   if j in con.coeffs), ZERO)
        if lp.lower[j] is None:
            _check(rc == 0, f"reduced cost of free variable {j} is {rc}, not 0")
        elif minimize:
            _check(rc >= 0, f"reduced cost of variable {j} is negative")
            _check(rc * x[j] == 0, f"complementary slackness fails on variable {j}")
        else:
            _check(rc <= 0, f"reduced cost of variable {j} is positive")
            _check(rc * x[j] == 0, f"complementary slackness fails on variable {j}")
    dual_value = sum((duals[r] * con.rhs for r, con in enumerate(lp.constraints)), ZERO)
    dual_value += sum((bound_duals[j] * lp.upper[j] for j in range(lp.n_vars)
                       if lp.upper[j] is not None), ZERO)
    _check(dual_value == out.value, f"strong duality gap: primal {out.value}, dual {dual_value}")


# ---------------------------------------------------------------------------
# lazy constraint generation


@dataclass
class CuttingPlaneResult:
    """Final master outcome plus the cuts that produced it.

    ``converged`` is True when the loop closed conclusively: the final
    solution violates no oracle (or the master became infeasible, which no
    added cut can repair). False means the round cap was hit.
    """

    outcome: LpOutcome
    added: list[Constraint]
    rounds: int
    converged: bool


Oracle = Callable[[LpOutcome], "list[Constraint] | None"]


def _signature(con: Constraint) -> tuple:
    items = sorted(con.coeffs.items())
    denom_lcm = 1
    for _, c in items:
        denom_lcm = denom_lcm * c.denominator // gcd(denom_lcm, c.denominator)
    denom_lcm = denom_lcm * con.rhs.denominator // gcd(denom_lcm, con.rhs.denominator)
    ints = [int(c * denom_lcm) for _, c in items] + [int(con.rhs * denom_lcm)]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return (tuple(j for j, _ in items), tuple(ints[:-1]), con.rel, ints[-1])


def _cut_is_violated(con: Constraint, out: LpOutcome) -> bool:
    if out.status == OPTIMAL:
        return not con.satisfied_by(out.x)
    if out.status == UNBOUNDED:
        if out.x is not None and not con.satisfied_by(out.x):
            return True
        along = sum((c * out.ray[j] for j, c in con.coeffs.items()), ZERO)
        if con.rel == LE:
            return along > 0
        if con.rel == GE:
            return along < 0
        return along != 0
    return False


def cutting_plane(lp: LinearProgram, oracles: Sequence[Oracle],
                  max_rounds: int = 10_000) -> CuttingPlaneResult:
    """Solve ``lp`` under lazily generated constraints.

    Each round solves the master and consults the oracles in order; the
    first oracle returning violated cuts ends the round and the cuts are
    appended (so later oracles never see a candidate an earlier oracle has
    already rejected). The loop converges when no oracle objects, or
    conclusively when the master goes infeasible. Every returned cut is
    checked to be genuinely violated, and a previously added cut coming
    back still violated raises :class:`CuttingPlaneError`, since with exact
    arithmetic that can only be a logic bug.
    """
    if max_rounds < 1:
        raise LpError("max_rounds must be positive")
    seen = {_signature(con) for con in lp.constraints}
    added: list[Constraint] = []
    out = solve(lp)
    for rounds in range(1, max_rounds + 1):
        if out.status == INFEASIBLE:
            return CuttingPlaneResult(out, added, rounds, True)
        cuts: list[Constraint] = []
        for oracle in oracles:
            got = oracle(out)
            if got:
                cuts = list(got)
                break
        if not cuts:
            return CuttingPlaneResult(out, added, rounds, True)
        for cut in cuts:
            if not _cut_is_violated(cut, out):
                raise CuttingPlaneError("oracle returned a cut the current solution satisfies")
            sig = _signature(cut)
            if sig in seen:
                raise CuttingPlaneError(
                    "oracle returned a constraint already present and still violated")
            seen.add(sig)
            lp.add_constraint(cut.coeffs, cut.rel, cut.rhs)
            added.append(cut)
        if rounds < max_rounds:
            out = solve(lp)
    return CuttingPlaneResult(out, added, max_rounds, False)


# ---------------------------------------------------------------------------
# debug dump


def to_lp_text(lp: LinearProgram, name: str = "lp") -> str:
    """Human-readable LP-format dump for debugging; rationals stay exact."""

    def term(j: int, c: Fraction, first: bool) -> str:
        sign = "-" if c < 0 else ("" if first else "+")
        mag = abs(c)
        coeff = "" if mag == 1 else f"{mag} "
        return f"{sign} {coeff}x{j} ".replace("  ", " ")

    def linear(coeffs: Mapping[int, Fraction]) -> str:
        if not coeffs:
            return "0"
        parts = []
        for pos, (j, c) in enumerate(sorted(coeffs.items())):
            parts.append(term(j, c, pos == 0).strip())
        return " ".join(parts)

    lines = [f"\\ {name}", "Minimize" if lp.sense == "min" else "Maximize",
             f" obj: {linear(lp.objective)}", "Subject To"]
    for r, con in enumerate(lp.constraints):
        lines.append(f" c{r}: {linear(con.coeffs)} {con.rel} {con.rhs}")
    lines.append("Bounds")
    for j in range(lp.n_vars):
        lo = "-inf" if lp.lower[j] is None else "0"
        hi = "+inf" if lp.upper[j] is None else str(lp.upper[j])
        lines.append(f" {lo} <= x{j} <= {hi}")
    lines.append("End")
    return "\n".join(lines) + "\n"
