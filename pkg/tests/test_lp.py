"""Exact simplex and the cutting-plane driver.

Every optimal outcome is re-verified by lp.audit, which checks primal
feasibility, dual feasibility, complementary slackness and strong duality
as exact rational identities; passing it is a complete optimality proof
independent of the pivot path the solver took.
"""

import random
from fractions import Fraction

import pytest

from vsparse import lp

F = Fraction


def solve_audited(p: lp.LinearProgram) -> lp.LpOutcome:
    out = lp.solve(p)
    lp.audit(p, out)
    return out


# --- basic outcomes ----------------------------------------------------

def test_single_variable_max():
    p = lp.LinearProgram(1, "max", {0: 1})
    p.add_constraint({0: 1}, lp.LE, 5)
    out = solve_audited(p)
    assert out.status == lp.OPTIMAL
    assert out.value == 5 and out.x == [F(5)]


def test_single_variable_unbounded_with_unit_ray():
    p = lp.LinearProgram(1, "max", {0: 1})
    out = lp.solve(p)
    lp.audit(p, out)
    assert out.status == lp.UNBOUNDED
    assert out.ray == [F(1)]


def test_infeasible_program():
    p = lp.LinearProgram(1, "min", {0: 1})
    p.add_constraint({0: 1}, lp.LE, 1)
    p.add_constraint({0: 1}, lp.GE, 2)
    assert lp.solve(p).status == lp.INFEASIBLE


def test_triangle_interval_bounds():
    # One free length x = d(a,b) against fixed d(a,c) = d(c,b) = 1: the
    # triangle rows pin x to [|1-1|, 1+1]; enumerate both interval ends.
    def interval_lp(sense):
        p = lp.LinearProgram(1, sense, {0: 1})
        p.add_constraint({0: 1}, lp.LE, 2)    # x <= d(a,c) + d(c,b)
        p.add_constraint({0: 1}, lp.GE, 0)    # d(a,c) <= x + d(c,b)
        return p
    assert solve_audited(interval_lp("min")).value == 0
    assert solve_audited(interval_lp("max")).value == 2


def test_two_variable_vertex_optimum():
    # max 3x + 2y over x+y <= 4, x <= 2, y <= 3: vertices (0,0), (2,0),
    # (2,2), (1,3), (0,3) give values 0, 6, 10, 9, 6.
    p = lp.LinearProgram(2, "max", {0: 3, 1: 2})
    p.add_constraint({0: 1, 1: 1}, lp.LE, 4)
    p.add_constraint({0: 1}, lp.LE, 2)
    p.add_constraint({1: 1}, lp.LE, 3)
    out = solve_audited(p)
    assert out.value == 10
    assert out.x == [F(2), F(2)]


def test_beale_cycling_instance_terminates():
    # Classic degenerate instance that cycles without an anti-cycling rule.
    p = lp.LinearProgram(4, "min", {0: F(-3, 4), 1: 150, 2: F(-1, 50), 3: 6})
    p.add_constraint({0: F(1, 4), 1: -60, 2: F(-1, 25), 3: 9}, lp.LE, 0)
    p.add_constraint({0: F(1, 2), 1: -90, 2: F(-1, 50), 3: 3}, lp.LE, 0)
    p.add_constraint({2: 1}, lp.LE, 1)
    out = solve_audited(p)
    assert out.value == F(-1, 20)


def test_equality_rows_and_free_variables():
    # min x + y with x free, x + y = 3, y <= 1: push x down? No: objective
    # x + y = 3 is constant on the feasible set.
    p = lp.LinearProgram(2, "min", {0: 1, 1: 1})
    p.set_free(0)
    p.add_constraint({0: 1, 1: 1}, lp.EQ, 3)
    p.add_constraint({1: 1}, lp.LE, 1)
    out = solve_audited(p)
    assert out.value == 3


def test_free_variable_goes_negative():
    p = lp.LinearProgram(1, "min", {0: 1})
    p.set_free(0)
    p.add_constraint({0: 1}, lp.GE, -7)
    out = solve_audited(p)
    assert out.value == -7


def test_upper_bounds_without_constraints():
    p = lp.LinearProgram(2, "max", {0: 1, 1: 2})
    p.set_upper(0, F(1, 2))
    p.set_upper(1, F(1, 3))
    out = solve_audited(p)
    assert out.value == F(1, 2) + F(2, 3)


# --- input validation --------------------------------------------------

def test_rejects_bad_construction():
    with pytest.raises(lp.LpError):
        lp.LinearProgram(-1)
    with pytest.raises(lp.LpError):
        lp.LinearProgram(1, "maximize")
    p = lp.LinearProgram(1)
    with pytest.raises(lp.LpError):
        p.add_constraint({0: 1}, "<", 0)
    with pytest.raises(lp.LpError):
        p.add_constraint({1: 1}, lp.LE, 0)
    with pytest.raises(lp.LpError):
        p.set_objective_coeff(3, 1)


def test_empty_program_is_an_error():
    with pytest.raises(lp.LpError):
        lp.solve(lp.LinearProgram(0))


# --- properties over random programs -----------------------------------

def random_program(rng: random.Random) -> lp.LinearProgram:
    n = rng.randint(1, 4)
    sense = rng.choice(["min", "max"])
    p = lp.LinearProgram(n, sense,
                         {j: F(rng.randint(-4, 4), rng.randint(1, 3)) for j in range(n)})
    for j in range(n):
        if rng.random() < 0.25:
            p.set_free(j)
        if rng.random() < 0.4:
            p.set_upper(j, F(rng.randint(0, 6), rng.randint(1, 2)))
    for _ in range(rng.randint(1, 5)):
        coeffs = {j: F(rng.randint(-3, 3)) for j in range(n) if rng.random() < 0.8}
        p.add_constraint(coeffs, rng.choice([lp.LE, lp.GE, lp.EQ]),
                         F(rng.randint(-5, 5), rng.randint(1, 2)))
    return p


@pytest.mark.parametrize("seed", range(120))
def test_every_outcome_passes_the_exact_audit(seed):
    p = random_program(random.Random(seed))
    out = lp.solve(p)
    lp.audit(p, out)


def test_random_programs_cover_all_statuses():
    statuses = {lp.solve(random_program(random.Random(seed))).status
                for seed in range(120)}
    assert statuses == {lp.OPTIMAL, lp.INFEASIBLE, lp.UNBOUNDED}


@pytest.mark.parametrize("seed", range(30))
def test_row_permutation_keeps_the_value(seed):
    rng = random.Random(1000 + seed)
    p = random_program(rng)
    out = lp.solve(p)
    q = lp.LinearProgram(p.n_vars, p.sense, p.objective)
    q.lower = list(p.lower)
    q.upper = list(p.upper)
    for con in rng.sample(p.constraints, len(p.constraints)):
        q.add_constraint(con.coeffs, con.rel, con.rhs)
    out2 = lp.solve(q)
    assert out2.status == out.status
    if out.status == lp.OPTIMAL:
        assert out2.value == out.value


@pytest.mark.parametrize("seed", range(20))
def test_solving_twice_is_deterministic(seed):
    p1 = random_program(random.Random(2000 + seed))
    p2 = random_program(random.Random(2000 + seed))
    o1, o2 = lp.solve(p1), lp.solve(p2)
    assert o1.status == o2.status and o1.x == o2.x and o1.value == o2.value


# --- cutting plane -----------------------------------------------------

def test_no_oracles_returns_master_optimum_in_one_round():
    p = lp.LinearProgram(1, "min", {0: 1})
    res = lp.cutting_plane(p, [])
    assert res.converged and res.rounds == 1
    assert res.outcome.value == 0 and res.added == []


def test_single_cut_convergence():
    p = lp.LinearProgram(1, "min", {0: 1})

    def want_q_at_least_3(out):
        if out.x[0] < 3:
            return [lp.Constraint({0: F(1)}, lp.GE, F(3))]
        return None

    res = lp.cutting_plane(p, [want_q_at_least_3])
    assert res.converged
    assert res.outcome.value == 3
    assert len(res.added) == 1


def test_converged_point_satisfies_every_oracle_cut():
    # Approximate a disc by tangent cuts at a fixed set of slopes; the
    # converged point must satisfy each tangent exactly.
    slopes = [(F(1), F(1), F(4)), (F(1), F(-1), F(3)), (F(1), F(3), F(6))]
    p = lp.LinearProgram(2, "max", {0: 1, 1: 1})
    p.set_free(1)

    def oracle(out):
        for a, b, rhs in slopes:
            if a * out.x[0] + b * out.x[1] > rhs:
                return [lp.Constraint({0: a, 1: b}, lp.LE, rhs)]
        return None

    res = lp.cutting_plane(p, [oracle])
    assert res.converged
    x = res.outcome.x
    assert all(a * x[0] + b * x[1] <= rhs for a, b, rhs in slopes)
    assert oracle(res.outcome) is None


def test_round_cap_reports_non_convergence():
    p = lp.LinearProgram(1, "min", {0: 1})
    state = {"level": 0}

    def always_hungry(out):
        state["level"] += 1
        return [lp.Constraint({0: F(1)}, lp.GE, F(state["level"]))]

    res = lp.cutting_plane(p, [always_hungry], max_rounds=5)
    assert not res.converged
    assert res.rounds == 5


def test_satisfied_cut_raises():
    p = lp.LinearProgram(1, "min", {0: 1})

    def lazy_oracle(out):
        return [lp.Constraint({0: F(1)}, lp.GE, F(-1))]  # already true at x=0

    with pytest.raises(lp.CuttingPlaneError):
        lp.cutting_plane(p, [lazy_oracle])


def test_repeated_cut_raises():
    # One batch carrying x >= 3 twice, the second copy scaled by 2: the
    # canonical signatures collide and the driver must refuse the repeat.
    p = lp.LinearProgram(1, "min", {0: 1})

    def stutter(out):
        return [lp.Constraint({0: F(1)}, lp.GE, F(3)),
                lp.Constraint({0: F(2)}, lp.GE, F(6))]

    with pytest.raises(lp.CuttingPlaneError):
        lp.cutting_plane(p, [stutter])


def test_master_infeasible_is_conclusive():
    p = lp.LinearProgram(1, "min", {0: 1})
    p.add_constraint({0: 1}, lp.LE, 2)

    def demand_too_much(out):
        if out.status == lp.OPTIMAL and out.x[0] < 3:
            return [lp.Constraint({0: F(1)}, lp.GE, F(3))]
        return None

    res = lp.cutting_plane(p, [demand_too_much])
    assert res.converged
    assert res.outcome.status == lp.INFEASIBLE


def test_oracle_order_first_objection_wins():
    p = lp.LinearProgram(1, "min", {0: 1})
    calls = []

    def first(out):
        calls.append("first")
        if out.x[0] < 1:
            return [lp.Constraint({0: F(1)}, lp.GE, F(1))]
        return None

    def second(out):
        calls.append("second")
        if out.x[0] < 2:
            return [lp.Constraint({0: F(1)}, lp.GE, F(2))]
        return None

    res = lp.cutting_plane(p, [first, second])
    assert res.converged and res.outcome.value == 2
    # round 1: first objects, second never consulted
    assert calls[0] == "first" and calls[1] == "first"


def test_max_rounds_must_be_positive():
    with pytest.raises(lp.LpError):
        lp.cutting_plane(lp.LinearProgram(1), [], max_rounds=0)


# --- debug dump --------------------------------------------------------

def test_lp_text_dump_mentions_all_parts():
    p = lp.LinearProgram(2, "max", {0: 1, 1: F(1, 2)})
    p.add_constraint({0: 1, 1: 1}, lp.LE, 3)
    p.set_upper(0, 7)
    text = lp.to_lp_text(p, "demo")
    assert "Maximize" in text and "x0" in text and "x1" in text
    assert "3" in text and "demo" in text
