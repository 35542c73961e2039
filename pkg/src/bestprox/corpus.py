"""Built-in worked examples with their expected results, used as a regression suite.

Each :class:`CorpusEntry` holds an instance and a list of :class:`Expectation`
records.  An expectation may carry a ``by_definition`` alternative: the value
the definitions actually produce where the source example states something
else.  Matching that alternative is reported as a *discrepancy*, not a
failure, and the note explaining it is surfaced in the summary.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

from .core import (
    Assumptions,
    MappingF,
    PointSet,
    ProblemInstance,
    ProximityFunction,
    as_point,
    proximal_subsets,
    same_point,
)

VALUE_TOL = 1e-12
POINT_TOL = 1e-9

PASS, FAIL, DISCREPANCY = "pass", "fail", "discrepancy"


@dataclass(frozen=True)
class Expectation:
    op: str
    expected: Any
    note: str
    args: dict = field(default_factory=dict)
    by_definition: Any = None

    def label(self) -> str:
        if not self.args:
            return self.op
        inner = ", ".join(f"{k}={v}" for k, v in self.args.items())
        return f"{self.op}({inner})"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    instance: ProblemInstance
    expected: tuple
    discrepancies: tuple = ()


# ------------------------------------------------------------ builtins


def _seg(start, end, label, samples=101):
    return PointSet.segment(start, end, samples, label)


def _inst(name, Re, Om, F, phi, dim, complete=False, compact=False, **kw):
    if isinstance(F, list) and F and isinstance(F[0], str):
        mapping = MappingF.simple(F, dim)
    else:
        mapping = MappingF.from_sources(F, dim)
    return ProblemInstance(
        Re, Om, mapping, ProximityFunction.from_source(phi, dim),
        assumptions=Assumptions(complete, compact), name=name, **kw,
    )


def _ex1_7(variant: str) -> CorpusEntry:
    phi = "a2^2 - b2^2" if variant == "F1" else "a2*b2"
    inst = _inst(
        f"ex1_7_{variant}",
        _seg((2.0, -2.0), (2.0, 0.0), "Re"),
        _seg((2.0, 0.0), (2.0, 2.0), "Om"),
        ["a1", "a2"], phi, 2,
    )
    notes = ("The violating comparison for the second function is stated at points with first "
             "coordinate 1, outside Re; the function ignores first coordinates, so the witness "
             "is encoded with first coordinate 2.",)
    if variant == "F1":
        exp = (
            Expectation("d_phi", 0.0, "worked example: the squared-coordinate function reaches 0 on the sets"),
            Expectation("check", "holds", "worked example: the first function is said to have the p-property",
                        {"def": "p-property"}),
        )
        return CorpusEntry(inst.name, inst, exp, ())
    exp = (
        Expectation("d_phi", 0.0, "worked example: the product function reaches 0 on the sets"),
        Expectation("check", "fails", "worked example: the second function is said to lack the p-property",
                    {"def": "p-property"}),
        Expectation("phi_value", 0.0, "worked example: first cross pair of the violating comparison attains 0",
                    {"x": (2.0, -0.5), "y": (2.0, 0.0)}),
        Expectation("phi_value", 1.0 / 6.0, "worked example: the two Re points of the comparison are 1/6 apart",
                    {"x": (2.0, -0.5), "y": (2.0, -1.0 / 3.0)}),
    )
    return CorpusEntry(inst.name, inst, exp, notes)


def _ex1_10() -> CorpusEntry:
    # the [0, 1] branch is listed first so that y = 0 takes it, as in the source
    F = [("min(a2, 1 - a2)", ["0", "1 - 2*a2"]),
         ("min(a2 + 1, -a2)", ["1", "1 + a2/2"])]
    inst = _inst(
        "ex1_10",
        PointSet.explicit([(0.0, 0.5), (0.0, -0.5)], "Re"),
        PointSet.explicit([(0.0, 0.0), (1.0, 0.75), (1.0, 5.0)], "Om"),
        F, "(a1 - b1) + (a2 - b2)", 2,
    )
    witness = {"alpha1": [0.0, 0.5], "alpha2": [0.0, -0.5], "beta1": [0.0, 0.5], "beta2": [0.0, 0.5],
               "lhs": 1.0, "rhs": 0.0}
    exp = (
        Expectation("d_phi", 0.5, "worked example: the proximity distance is 1/2"),
        Expectation("F_value", (0.0, 0.0), "worked example: upper branch maps (0, 1/2) to (0, 0)",
                    {"x": (0.0, 0.5)}),
        Expectation("F_value", (1.0, 0.75), "worked example: lower branch maps (0, -1/2) to (1, 3/4)",
                    {"x": (0.0, -0.5)}),
        Expectation("check", "holds", "worked example: the map is a modified proximal contraction",
                    {"def": "modified-proximal-contraction"}),
        Expectation("check", "fails", "worked example: the map is not a proximal contraction",
                    {"def": "proximal-contraction"}),
        Expectation("witness", witness,
                    "worked example: |Phi(alpha1, alpha2)| = 1 exceeds c times |Phi(beta1, beta2)| = 0",
                    {"def": "proximal-contraction"}),
    )
    return CorpusEntry(inst.name, inst, exp, ())


def _ex2_2(variant: str) -> CorpusEntry:
    F = [("-abs(a1)", ["1", "(a2 - 1)/4"]),
         ("-abs(a1 - 2/3)", ["1", "a2/2"])]
    phi = "a2 - b2" if variant == "phi" else "a2 + b2"
    inst = _inst(
        f"ex2_2_{variant}",
        _seg((0.0, 0.0), (0.0, 0.5), "Re"),
        _seg((2.0 / 3.0, 0.0), (2.0 / 3.0, 0.5), "Om"),
        F, phi, 2,
    )
    notes = [
        "F sends Re to points with first coordinate 1, outside Om; Phi reads only second "
        "coordinates, so the encoding keeps F as given and a range warning is expected.",
        "The intermediate inequality of the example carries a spurious additive term; only the "
        "final verdicts are asserted.",
    ]
    if variant == "phi":
        notes.append(
            "With Phi = a2 - b2 the images F(beta) have negative second coordinates, so no alpha "
            "in Re satisfies |Phi(alpha, F(beta))| = D = 0: the contraction condition is "
            "satisfied vacuously rather than exercised.")
        exp = (
            Expectation("d_phi", 0.0, "worked example: the proximity distance is 0"),
            Expectation("check", "holds", "worked example: a p-proximal contraction with c = 2/3",
                        {"def": "p-proximal-contraction"}, by_definition="vacuous"),
        )
    else:
        exp = (
            Expectation("d_phi", 0.0, "worked example: the sum function also reaches 0 at the origin"),
            Expectation("check", "fails", "worked example: with g in place of Phi the condition fails",
                        {"def": "p-proximal-contraction"}),
        )
    return CorpusEntry(inst.name, inst, exp, tuple(notes))


def _ex2_3() -> CorpusEntry:
    # Om at 201 samples shares the 0.01 step of Re, so 1/4, 1/2 and 1 lie on both grids
    inst = _inst("ex2_3", _seg((0.0,), (1.0,), "Re"), _seg((0.0,), (2.0,), "Om", 201),
                 ["a1/2"], "a1^2 - b1^2", 1)
    exp = (
        Expectation("d_phi", 0.0, "worked example: the sets share the point 0"),
        Expectation("check", "holds", "worked example: a p-proximal contraction",
                    {"def": "p-proximal-contraction"}),
        Expectation("min_c_le", 0.25, "worked example: the constant c = 1/4 works",
                    {"def": "p-proximal-contraction"}),
        Expectation("phi_value", 3.0 / 16.0, "worked example: |Phi(1/2, 1/4)| = 3/16",
                    {"x": (0.5,), "y": (0.25,)}),
    )
    notes = ("The final inequality of the example names g although only Phi is defined there; "
             "it is read as Phi.",)
    return CorpusEntry(inst.name, inst, exp, notes)


def _ex_thm1() -> CorpusEntry:
    inst = _inst("ex_thm1", _seg((0.0, -1.0), (0.0, 0.0), "Re"), _seg((0.0, 0.0), (0.0, 1.0), "Om"),
                 ["0", "a2/4"], "b2 - a2", 2, complete=True, compact=True)
    exp = (
        Expectation("d_phi", 0.0, "example after the main theorem: the proximity distance is 0"),
        Expectation("proximal_subsets", {"Re_Phi": [(0.0, 0.0)], "Om_Phi": [(0.0, 0.0)]},
                    "example after the main theorem: both proximal subsets are {(0, 0)}"),
        Expectation("F_value", (0.0, -0.25), "example after the main theorem: F(x, y) = (0, y/4)",
                    {"x": (0.0, -1.0)}),
        Expectation("check", "holds", "example after the main theorem: a p-proximal contraction",
                    {"def": "p-proximal-contraction"}),
        Expectation("min_c_le", 0.25, "example after the main theorem: c = 1/4",
                    {"def": "p-proximal-contraction"}),
        Expectation("oracle_unique", (0.0, 0.0), "example after the main theorem: unique best proximity point (0, 0)"),
        Expectation("solve", (0.0, 0.0), "example after the main theorem: the iteration reaches (0, 0)"),
    )
    return CorpusEntry(inst.name, inst, exp, ())


def _ex_thm2() -> CorpusEntry:
    inst = _inst("ex_thm2", _seg((0.0, -1.0), (0.0, 0.0), "Re"), _seg((1.0, 0.0), (1.0, 1.0), "Om"),
                 ["1", "-a2/5"], "a2^2 - b2^2", 2, complete=True, compact=True)
    Re, Om = inst.Re.points, inst.Om.points
    exp = (
        Expectation("d_phi", 0.0, "final example: the proximity distance is 0"),
        Expectation("proximal_subsets", {"Re_Phi": [(0.0, 0.0)], "Om_Phi": [(0.0, 0.0)]},
                    "final example: both proximal subsets are stated as {(0, 0)}",
                    by_definition={"Re_Phi": list(Re), "Om_Phi": list(Om)}),
        Expectation("F_value", (1.0, 0.0), "final example: F(0, t) = (1, -t/5)", {"x": (0.0, 0.0)}),
        Expectation("check", "holds", "final example: F is p-proximal contractive",
                    {"def": "p-proximal-contractive"}),
        Expectation("check", "holds", "final example: the pair has the p-property", {"def": "p-property"}),
        Expectation("check", "holds", "final example: the existence hypotheses are met",
                    {"def": "thm2-hypotheses"}),
        Expectation("thm2_xi_lambda", {"xi": (0.0, 0.0), "lambda": (0.0, 0.0)},
                    "final example: xi = lambda = (0, 0) satisfy the extra conditions"),
        Expectation("oracle_unique", (0.0, 0.0), "final example: F has a unique best proximity point"),
        Expectation("solve", (0.0, 0.0), "final example: the best proximity point is (0, 0)"),
    )
    notes = (
        "The stated Om_Phi = {(0, 0)} is not a subset of Om = {1} x [0, 1]. By definition every "
        "(0, t) pairs with (1, -t) at |Phi| = 0, so Re_Phi = Re and Om_Phi = Om.",
    )
    return CorpusEntry(inst.name, inst, exp, notes)


_BUILDERS = {
    "ex1_7_F1": lambda: _ex1_7("F1"),
    "ex1_7_F2": lambda: _ex1_7("F2"),
    "ex1_10": _ex1_10,
    "ex2_2_phi": lambda: _ex2_2("phi"),
    "ex2_2_g": lambda: _ex2_2("g"),
    "ex2_3": _ex2_3,
    "ex_thm1": _ex_thm1,
    "ex_thm2": _ex_thm2,
}

NAMES = tuple(_BUILDERS)


def load_builtin(name: str) -> CorpusEntry:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(NAMES)}") from None


def all_entries() -> list:
    return [load_builtin(n) for n in NAMES]


# ---------------------------------------------------------- regressions


@dataclass
class ExpectationResult:
    expectation: Expectation
    status: str
    got: Any
    diff: str = ""

    def to_dict(self) -> dict:
        return {
            "op": self.expectation.label(),
            "status": self.status,
            "expected": _jsonable(self.expectation.expected),
            "got": _jsonable(self.got),
            "note": self.expectation.note,
            "diff": self.diff,
        }


@dataclass
class EntryResult:
    name: str
    results: list
    discrepancies: tuple = ()

    @property
    def passed(self) -> bool:
        return all(r.status != FAIL for r in self.results)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": PASS if self.passed else FAIL,
            "results": [r.to_dict() for r in self.results],
            "discrepancies": list(self.discrepancies),
        }


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _close(a, b, tol) -> bool:
    """Structural comparison: numbers within ``tol``, containers element-wise."""
    if isinstance(a, bool) or isinstance(b, bool) or isinstance(a, str) or isinstance(b, str) or a is None or b is None:
        return a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k], tol) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_close(x, y, tol) for x, y in zip(a, b))
    return a == b


class _Runner:
    def __init__(self, inst: ProblemInstance, threads: int):
        from .checkers import Scan

        self.inst = inst
        self.threads = threads
        self.scan = Scan(inst)
        self.reports = {}

    def report(self, name):
        from .checkers import CHECKS

        if name not in self.reports:
            self.reports[name] = CHECKS[name](self.inst, threads=self.threads, scan=self.scan)
        return self.reports[name]

    def evaluate(self, exp: Expectation):
        """Return ``(got, comparator)``; the comparator tests a candidate expected value."""
        op, args = exp.op, exp.args
        if op == "d_phi":
            got = self.scan.D
            return got, lambda e: _close(got, e, VALUE_TOL)
        if op == "check":
            got = self.report(args["def"]).verdict
            return got, lambda e: got == e
        if op == "min_c_le":
            got = self.report(args["def"]).min_c
            return got, lambda e: got is not None and got <= e + 1e-9
        if op == "witness":
            rep = self.report(args["def"])
            got = None if rep.witness is None else dict(rep.witness, lhs=rep.lhs, rhs=rep.rhs)
            return got, lambda e: got is not None and _close(got, _jsonable(e), POINT_TOL)
        if op == "phi_value":
            got = abs(self.inst.Phi(as_point(args["x"]), as_point(args["y"])))
            return got, lambda e: _close(got, e, VALUE_TOL)
        if op == "F_value":
            got = self.inst.F(as_point(args["x"]))
            return got, lambda e: _close(list(got), list(e), VALUE_TOL)
        if op == "proximal_subsets":
            re_phi, om_phi = proximal_subsets(self.inst)
            got = {"Re_Phi": list(re_phi.points), "Om_Phi": list(om_phi.points)}
            return got, lambda e: _close(_jsonable(got), _jsonable(e), POINT_TOL)
        if op == "thm2_xi_lambda":
            d = self.report("thm2-hypotheses").details
            got = {"xi": d.get("xi"), "lambda": d.get("lambda")}
            return got, lambda e: _close(got, _jsonable(e), POINT_TOL)
        if op == "oracle_unique":
            from .oracle import brute_force_bpp

            res = brute_force_bpp(self.inst)
            got = res.points()[0] if res.is_unique else [list(p) for p in res.points()]
            return got, lambda e: res.is_unique and same_point(got, e, POINT_TOL)
        if op == "solve":
            from .solver import CONVERGED, iterate

            trace = iterate(self.inst)
            got = trace.final_point if trace.status == CONVERGED else trace.status
            return got, lambda e: trace.status == CONVERGED and trace.final_residual <= 1e-9 \
                and same_point(got, e, POINT_TOL)
        raise ValueError(f"unknown expectation op {op!r}")


def _summarize(value) -> str:
    text = repr(_jsonable(value))
    return text if len(text) <= 200 else text[:197] + "..."


def run_entry(entry: CorpusEntry, threads: int = 1) -> EntryResult:
    runner = _Runner(entry.instance, threads)
    results = []
    for exp in entry.expected:
        try:
            got, matches = runner.evaluate(exp)
        except Exception as exc:  # reported, not raised
            results.append(ExpectationResult(exp, FAIL, None, f"error: {exc}"))
            continue
        if matches(exp.expected):
            results.append(ExpectationResult(exp, PASS, got))
        elif exp.by_definition is not None and matches(exp.by_definition):
            results.append(ExpectationResult(
                exp, DISCREPANCY, got, "stated value differs; computed value follows the definitions"))
        else:
            diff = f"expected {_summarize(exp.expected)}, got {_summarize(got)}"
            results.append(ExpectationResult(exp, FAIL, got, diff))
    return EntryResult(entry.name, results, entry.discrepancies)


def run_regressions(names: Optional[list] = None, entries: Optional[list] = None,
                    threads: int = 1, workers: int = 1) -> list:
    """Run expectations; ``names`` filters builtins, ``entries`` supplies custom ones.

    Results come back in input order whatever ``workers`` is.
    """
    if entries is None:
        entries = [load_builtin(n) for n in (NAMES if names is None else names)]
    if workers <= 1:
        return [run_entry(e, threads) for e in entries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda e: run_entry(e, threads), entries))


def export_all(directory) -> list:
    """Write every builtin as a problem file ``<name>.yaml`` in ``directory``."""
    from pathlib import Path

    from .problem_file import export_file

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    return [export_file(load_builtin(n).instance, out / f"{n}.yaml") for n in NAMES]
