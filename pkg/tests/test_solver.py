from __future__ import annotations

import csv
import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bestprox import solver
from bestprox.checkers import HOLDS, check_p_proximal_contraction, thm1_hypotheses_hold
from bestprox.core import MappingF, PointSet, ProblemInstance, ProximityFunction, proximal_subsets
from bestprox.corpus import NAMES, load_builtin
from bestprox.randgen import halving_instance, random_instance


def test_example_step_and_iteration():
    inst = load_builtin("ex_thm1").instance
    assert solver.proximal_step(inst, (0.0, 0.0)) == ((0.0, 0.0), 0.0)
    trace = solver.iterate(inst)
    assert trace.status == solver.CONVERGED
    assert trace.final_point == (0.0, 0.0) and trace.final_residual == 0.0


def test_residual_values():
    thm1 = load_builtin("ex_thm1").instance
    assert solver.residual(thm1, (0.0, 0.0)) == 0.0
    assert solver.residual(thm1, (0.0, -1.0)) == 0.75
    assert solver.residual(load_builtin("ex_thm2").instance, (0.0, 0.0)) == 0.0
    assert solver.distance_to_om(thm1, (0.0, -0.5)) == 0.5


def test_halving_step_and_trace():
    inst = halving_instance()
    assert solver.proximal_step(inst, (0.0, 1.0)) == ((0.0, 0.5), 0.0)
    trace = solver.iterate(inst, (0.0, 1.0))
    assert trace.status == solver.CONVERGED
    for n, pt in enumerate(trace.points):
        assert pt == (0.0, 2.0 ** -n)
    assert trace.step_gaps == [2.0 ** -(n + 1) for n in range(len(trace.step_gaps))]
    assert trace.step_gaps[-1] <= 1e-9


def test_rate_check_halving_exact():
    trace = solver.iterate(halving_instance(), (0.0, 1.0))
    rep = solver.rate_check(trace, 1 / 3)
    assert rep.holds and rep.factor == 0.5
    assert all(g == b for g, b in zip(trace.step_gaps, rep.bounds))
    # a slower constant is never violated; a faster one is
    assert solver.rate_check(trace, 0.5).holds
    bad = solver.rate_check(trace, 0.1)
    assert not bad.holds and bad.first_violation == 1


def test_rate_check_constant_trace_and_errors():
    trace = solver.iterate(load_builtin("ex_thm1").instance)
    assert solver.rate_check(trace, 0.25).holds
    with pytest.raises(ValueError):
        solver.rate_check(trace, 1.0)
    with pytest.raises(ValueError):
        solver.rate_check(solver.IterationTrace(points=[(0.0,)]), 0.5)


def test_cauchy_profile_halving():
    trace = solver.iterate(halving_instance(), (0.0, 1.0))
    p_max = 3
    rep = solver.cauchy_check(trace, p_max)
    last = len(trace.points) - 1
    for n, t in enumerate(rep.profile):
        top = min(p_max, last - n)
        assert t == pytest.approx(2.0 ** -n * (1 - 2.0 ** -top), rel=1e-12)
    assert all(a > b for a, b in zip(rep.profile, rep.profile[1:]))


def test_cauchy_constant_and_oscillating():
    trace = solver.iterate(load_builtin("ex_thm1").instance)
    assert solver.cauchy_check(trace, 4).profile == [0.0]
    assert solver.cauchy_check(trace, 4).consistent
    # F swaps two points, so the iteration bounces forever
    swap = ProblemInstance(
        PointSet.explicit([(0.0,), (1.0,)], "Re"), PointSet.explicit([(0.0,), (1.0,)], "Om"),
        MappingF.simple(["1 - a1"], 1), ProximityFunction.from_source("a1 - b1", 1),
    )
    trace = solver.iterate(swap, max_iters=40)
    assert trace.status == solver.MAX_ITERS
    rep = solver.cauchy_check(trace, 2)
    assert not rep.consistent and min(rep.profile) == 1.0
    with pytest.raises(ValueError):
        solver.cauchy_check(trace, 0)


def test_start_must_be_in_proximal_set():
    with pytest.raises(solver.SolverError):
        solver.iterate(load_builtin("ex_thm1").instance, (0.0, -0.5))


def test_infeasible_step():
    # F(x) = x + 0.3 has no partner at |Phi| = D = 0 in Re
    inst = ProblemInstance(
        PointSet.explicit([(0.0,), (1.0,)], "Re"), PointSet.explicit([(0.0,), (1.0,)], "Om"),
        MappingF.simple(["a1 + 0.3"], 1), ProximityFunction.from_source("a1 - b1", 1),
    )
    assert solver.iterate(inst).status == solver.INFEASIBLE
    with pytest.raises(solver.SolverError):
        solver.proximal_step(inst, (0.0,))


@pytest.mark.parametrize("name", ["ex_thm1", "ex_thm2"])
def test_idempotent_at_solution(name):
    inst = load_builtin(name).instance
    assert solver.proximal_step(inst, (0.0, 0.0)) == ((0.0, 0.0), 0.0)


def test_exact_prefix():
    inst = load_builtin("ex2_3").instance
    trace = solver.iterate(inst, (0.02,))
    assert trace.points == [(0.02,), (0.01,), (0.0,), (0.0,)]
    exact = trace.exact_prefix(inst.eps_eq)
    assert exact.points == [(0.02,), (0.01,)]
    assert solver.rate_check(exact, 1 / 7).holds


def test_trace_csv_columns():
    trace = solver.iterate(halving_instance(), (0.0, 1.0))
    rows = list(csv.reader(io.StringIO(trace.to_csv())))
    assert rows[0] == ["n", "x1", "x2", "step_gap", "feasibility_error"]
    assert len(rows) == len(trace.points) + 1
    assert float(rows[1][2]) == 1.0 and float(rows[1][3]) == 0.5
    assert rows[-1][3] == "" and rows[-1][4] == ""
    assert trace.summary()["status"] == "converged"


def test_every_start_reaches_the_same_point():
    inst = load_builtin("ex_thm1").instance
    re_phi, _ = proximal_subsets(inst)
    ends = {solver.iterate(inst, p).final_point for p in re_phi}
    assert ends == {(0.0, 0.0)}
    thm2 = load_builtin("ex_thm2").instance
    re_phi, _ = proximal_subsets(thm2)
    for p in re_phi:
        trace = solver.iterate(thm2, p)
        assert trace.status == solver.CONVERGED
        assert trace.final_point == pytest.approx((0.0, 0.0), abs=1e-9)


@pytest.mark.parametrize("name", NAMES)
def test_trace_invariants_on_corpus(name):
    inst = load_builtin(name).instance
    re_phi, _ = proximal_subsets(inst)
    trace = solver.iterate(inst)
    members = set(re_phi.points)
    assert all(p in members for p in trace.points)
    for err, tol in zip(trace.feasibility_errors, trace.step_tolerances):
        assert err <= tol
    if trace.status == solver.CONVERGED:
        assert trace.step_gaps[-1] <= solver.DEFAULT_CONV_TOL
        assert trace.final_residual <= inst.eps_eq + max(trace.step_tolerances, default=0.0)


@pytest.mark.parametrize("name", NAMES)
def test_rate_bound_from_every_start(name):
    inst = load_builtin(name).instance
    rep = check_p_proximal_contraction(inst)
    if rep.verdict != HOLDS:
        return
    re_phi, _ = proximal_subsets(inst)
    for p in re_phi:
        trace = solver.iterate(inst, p).exact_prefix(inst.eps_eq)
        if len(trace.points) >= 2:
            assert solver.rate_check(trace, rep.min_c).holds


@given(st.integers(0, 100_000))
def test_random_rate_and_uniqueness(seed):
    inst = random_instance(seed)
    rep = check_p_proximal_contraction(inst)
    if rep.verdict != HOLDS:
        return
    trace = solver.iterate(inst)
    assert trace.status == solver.CONVERGED
    assert solver.rate_check(trace, rep.min_c).holds
    if thm1_hypotheses_hold(inst):
        re_phi, _ = proximal_subsets(inst)
        ends = [solver.iterate(inst, p).final_point for p in re_phi]
        assert all(e == ends[0] for e in ends)
