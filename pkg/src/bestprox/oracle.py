"""Brute-force ground truth for best proximity points.

``brute_force_bpp`` evaluates every point of Re with plain scalar loops and
shares nothing with the solver except expression evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import EPS_DUP, ProblemInstance, same_point


@dataclass
class OracleResult:
    bpp_candidates: list
    is_unique: bool
    d_phi_value: float
    qualified: bool = True

    def points(self) -> list:
        return [p for p, _ in self.bpp_candidates]

    def to_dict(self) -> dict:
        return {
            "definition": "oracle",
            "verdict": "unique" if self.is_unique else ("multiple" if self.qualified else "none"),
            "d_phi": self.d_phi_value,
            "qualified": self.qualified,
            "candidates": [{"point": list(p), "residual": r} for p, r in self.bpp_candidates],
        }


def brute_force_bpp(inst: ProblemInstance) -> OracleResult:
    phi, F, eps = inst.Phi, inst.F, inst.eps_eq
    D = min(abs(phi(a, b)) for a in inst.Re.points for b in inst.Om.points)

    scored = []
    for idx, a in enumerate(inst.Re.points):
        scored.append((abs(abs(phi(a, F(a))) - D), idx, a))
    scored.sort(key=lambda t: (t[0], t[1]))

    cands = [(a, r) for r, _, a in scored if r <= eps]
    qualified = bool(cands)
    if not cands:
        r, _, a = scored[0]
        cands = [(a, r)]

    distinct = []
    for a, _ in cands:
        if not any(same_point(a, b, EPS_DUP) for b in distinct):
            distinct.append(a)
    return OracleResult(cands, qualified and len(distinct) == 1, D, qualified)


@dataclass
class Agreement:
    agree: bool
    solver_point: Optional[tuple]
    solver_status: str
    oracle: OracleResult
    uniqueness_asserted: bool = False
    messages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "definition": "oracle-vs-solver",
            "verdict": "agree" if self.agree else "disagree",
            "solver_point": None if self.solver_point is None else list(self.solver_point),
            "solver_status": self.solver_status,
            "uniqueness_asserted": self.uniqueness_asserted,
            "oracle": self.oracle.to_dict(),
            "messages": list(self.messages),
        }


def oracle_vs_solver(inst: ProblemInstance, trace=None, check_uniqueness: Optional[bool] = None,
                     threads: int = 1) -> Agreement:
    """Compare a solver run with the oracle.

    The solver's final point must be an oracle candidate.  When
    ``check_uniqueness`` is true (by default: when every checkable hypothesis
    of the main theorem holds) the oracle must also report a unique candidate.
    Disagreements are reported, not raised.
    """
    from . import checkers, solver

    if trace is None:
        trace = solver.iterate(inst)
    res = brute_force_bpp(inst)
    msgs = []
    if trace.status != solver.CONVERGED:
        msgs.append(f"solver did not converge (status {trace.status})")
        return Agreement(False, trace.final_point, trace.status, res, False, msgs)

    point = trace.final_point
    member = res.qualified and any(same_point(point, c, EPS_DUP) for c in res.points())
    if not member:
        msgs.append(f"solver point {point} is not among the oracle candidates {res.points()}")
    if check_uniqueness is None:
        check_uniqueness = checkers.thm1_hypotheses_hold(inst, threads)
    ok = member
    if check_uniqueness and not res.is_unique:
        ok = False
        msgs.append(f"hypotheses hold but the oracle found {len(res.bpp_candidates)} candidates")
    return Agreement(ok, point, trace.status, res, bool(check_uniqueness), msgs)
