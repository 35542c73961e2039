from __future__ import annotations

import dataclasses

import pytest

from bestprox.corpus import (
    DISCREPANCY,
    FAIL,
    NAMES,
    Expectation,
    all_entries,
    load_builtin,
    run_regressions,
)


def test_names():
    assert set(NAMES) == {"ex1_7_F1", "ex1_7_F2", "ex1_10", "ex2_2_phi", "ex2_2_g", "ex2_3",
                          "ex_thm1", "ex_thm2"}


def test_unknown_builtin():
    with pytest.raises(KeyError):
        load_builtin("ex9_9")


def test_default_sampling():
    entry = load_builtin("ex_thm1")
    assert len(entry.instance.Re) == 101 and len(entry.instance.Om) == 101
    # this entry overrides the count so 1/4 lies on the Om grid
    ex23 = load_builtin("ex2_3").instance
    assert len(ex23.Om) == 201 and ex23.Om.index_of((0.25,)) is not None
    for x in (0.25, 0.5, 1.0):
        assert ex23.Re.index_of((x,)) is not None


@pytest.mark.parametrize("entry", all_entries(), ids=NAMES)
def test_every_expectation_has_a_note(entry):
    assert entry.expected
    for exp in entry.expected:
        assert exp.note.strip()
    assert entry.instance.name == entry.name


def test_full_corpus_passes():
    results = run_regressions()
    assert [r.name for r in results] == list(NAMES)
    failures = {r.name: [x.diff for x in r.results if x.status == FAIL] for r in results if not r.passed}
    assert not failures


def test_discrepancies_surface_without_failing():
    res = {r.name: r for r in run_regressions(["ex2_2_phi", "ex_thm2"])}
    for name in ("ex2_2_phi", "ex_thm2"):
        statuses = [x.status for x in res[name].results]
        assert DISCREPANCY in statuses and res[name].passed
        assert res[name].discrepancies


def test_corrupted_expectation_fails_with_diff():
    entry = load_builtin("ex1_10")
    bad = Expectation("d_phi", 0.25, "deliberately wrong")
    corrupted = dataclasses.replace(entry, expected=entry.expected + (bad,))
    (result,) = run_regressions(entries=[corrupted])
    assert not result.passed
    failed = [x for x in result.results if x.status == FAIL]
    assert len(failed) == 1
    assert "expected 0.25, got 0.5" in failed[0].diff


def test_empty_filter():
    assert run_regressions([]) == []


def test_order_independence_and_parallel():
    forward = {r.name: r.to_dict() for r in run_regressions()}
    backward = {r.name: r.to_dict() for r in run_regressions(list(reversed(NAMES)))}
    parallel = {r.name: r.to_dict() for r in run_regressions(workers=4)}
    assert forward == backward == parallel


def test_evaluation_errors_are_reported():
    entry = load_builtin("ex1_10")
    bad = Expectation("phi_value", 0.0, "point of wrong dimension", {"x": (1.0,), "y": (1.0,)})
    (result,) = run_regressions(entries=[dataclasses.replace(entry, expected=(bad,))])
    assert not result.passed and result.results[0].diff.startswith("error:")
