"""Proximal Picard iteration with residual, rate and Cauchy diagnostics.

Starting from a point of Re_Phi, each step picks the point of Re_Phi whose
|Phi| against the image of the current point is closest to D_Phi.  The
iteration stops once consecutive iterates are within ``conv_tol`` in |Phi|.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import EPS_DUP, ProblemInstance, as_point, proximal_indices

CONVERGED, MAX_ITERS, INFEASIBLE = "converged", "max_iters", "infeasible_step"

DEFAULT_CONV_TOL = 1e-9
DEFAULT_MAX_ITERS = 10_000


class SolverError(RuntimeError):
    pass


@dataclass
class IterationTrace:
    points: list
    step_gaps: list = field(default_factory=list)
    feasibility_errors: list = field(default_factory=list)
    step_tolerances: list = field(default_factory=list)
    status: str = MAX_ITERS
    final_residual: float = math.nan
    D: float = math.nan
    phi: object = field(default=None, repr=False, compare=False)

    def exact_prefix(self, eps: float) -> "IterationTrace":
        """The trace up to its first step whose feasibility error exceeds ``eps``.

        Only steps meeting ``|Phi(x_n+1, F(x_n))| = D`` are antecedent pairs of
        the contraction conditions; on sampled sets later steps may use grid
        slack, and the rate bound is not claimed for them.
        """
        n = next((i for i, e in enumerate(self.feasibility_errors) if e > eps), len(self.feasibility_errors))
        return IterationTrace(
            self.points[: n + 1], self.step_gaps[:n], self.feasibility_errors[:n],
            self.step_tolerances[:n], self.status, self.final_residual, self.D, self.phi,
        )

    @property
    def final_point(self):
        return self.points[-1]

    @property
    def iterations(self) -> int:
        return len(self.step_gaps)

    def summary(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "final_point": list(self.final_point),
            "final_residual": self.final_residual,
            "d_phi": self.D,
        }

    def to_csv(self) -> str:
        """Rows ``n, x1..xk, step_gap, feasibility_error``; the gap columns of a
        row describe the step leaving that point, blank on the last row."""
        k = len(self.points[0])
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n"] + [f"x{i + 1}" for i in range(k)] + ["step_gap", "feasibility_error"])
        for n, pt in enumerate(self.points):
            gap = repr(self.step_gaps[n]) if n < len(self.step_gaps) else ""
            err = repr(self.feasibility_errors[n]) if n < len(self.feasibility_errors) else ""
            writer.writerow([n] + [repr(c) for c in pt] + [gap, err])
        return buf.getvalue()


class _Stepper:
    """Precomputed |Phi| tables for stepping inside Re_Phi."""

    def __init__(self, inst: ProblemInstance, step_feas_tol: Optional[float] = None):
        self.inst = inst
        self.D, re_idx, _ = proximal_indices(inst)
        self.cand = inst.Re.array()[re_idx]
        self.cand_pts = [inst.Re.points[i] for i in re_idx]
        self.fixed_tol = step_feas_tol if step_feas_tol is not None else inst.step_feas_tol
        self.local = self.fixed_tol is None and inst.Re.sampled

    def tolerance(self, signed: np.ndarray, j: int) -> float:
        """Feasibility slack for choosing candidate ``j`` given the signed Phi column.

        Explicit sets get ``eps_eq``.  On a sampled Re the exact solution of
        ``|Phi| = D`` generally falls between grid points, and the best grid
        point misses it by up to half the gap to the neighbour on the other
        side.  The gap is measured on signed Phi values; |Phi| folds at zero
        and would understate it.
        """
        eps = self.inst.eps_eq
        if self.fixed_tol is not None:
            return self.fixed_tol
        if not self.local:
            return eps
        jumps = [abs(signed[n] - signed[j]) for n in (j - 1, j + 1) if 0 <= n < len(signed)]
        return max(eps, 0.5 * max(jumps)) if jumps else eps

    def step(self, xi) -> tuple:
        img = np.asarray(self.inst.F(xi), dtype=np.float64)
        signed = self.inst.Phi.matrix(self.cand, img[None, :])[:, 0]
        err = np.abs(np.abs(signed) - self.D)
        j = int(np.argmin(err))
        return j, float(err[j]), self.tolerance(signed, j)


def proximal_step(inst: ProblemInstance, xi, step_feas_tol: Optional[float] = None) -> tuple:
    """One step of the iteration: ``(next_point, feasibility_error)``.

    Raises :class:`SolverError` if no candidate meets the feasibility slack.
    """
    stepper = _Stepper(inst, step_feas_tol)
    j, err, tol = stepper.step(as_point(xi))
    if err > tol:
        raise SolverError(f"infeasible step: best feasibility error {err:.3g} exceeds {tol:.3g}")
    return stepper.cand_pts[j], err


def iterate(
    inst: ProblemInstance,
    xi0=None,
    max_iters: int = DEFAULT_MAX_ITERS,
    conv_tol: float = DEFAULT_CONV_TOL,
    step_feas_tol: Optional[float] = None,
) -> IterationTrace:
    stepper = _Stepper(inst, step_feas_tol)
    if not stepper.cand_pts:
        raise SolverError("Re_Phi is empty")
    if xi0 is None:
        xi = stepper.cand_pts[0]
    else:
        xi = as_point(xi0)
        if not any(all(abs(a - b) <= EPS_DUP for a, b in zip(p, xi)) for p in stepper.cand_pts):
            raise SolverError(f"start point {xi} is not in Re_Phi")
    trace = IterationTrace(points=[xi], D=stepper.D, phi=inst.Phi)
    phi = inst.Phi
    for _ in range(max_iters):
        j, err, tol = stepper.step(xi)
        if err > tol:
            trace.status = INFEASIBLE
            break
        nxt = stepper.cand_pts[j]
        gap = abs(phi(xi, nxt))
        trace.points.append(nxt)
        trace.step_gaps.append(gap)
        trace.feasibility_errors.append(err)
        trace.step_tolerances.append(tol)
        xi = nxt
        if gap <= conv_tol:
            trace.status = CONVERGED
            break
    else:
        trace.status = MAX_ITERS
    trace.final_residual = residual(inst, xi, stepper.D)
    return trace


def residual(inst: ProblemInstance, x, D: Optional[float] = None) -> float:
    """``||Phi(x, F(x))| - D_Phi|``; zero certifies a best proximity point of the sample."""
    if D is None:
        D, _, _ = proximal_indices(inst)
    x = as_point(x)
    return abs(abs(inst.Phi(x, inst.F(x))) - D)


def distance_to_om(inst: ProblemInstance, x) -> float:
    """``min over b in Om of |Phi(x, b)|``."""
    return float(inst.Phi.abs_matrix(np.asarray([as_point(x)]), inst.Om.array()).min())


@dataclass
class RateReport:
    holds: bool
    factor: float
    first_violation: Optional[int] = None
    bounds: list = field(default_factory=list)


def rate_check(trace: IterationTrace, c: float, eps: float = 1e-9) -> RateReport:
    """Check ``step_gaps[n] <= q**n * step_gaps[0] + eps`` with ``q = 2c/(1+c)``."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"contraction constant must lie in (0, 1), got {c!r}")
    if len(trace.points) < 2:
        raise ValueError("rate check needs at least two points")
    q = 2.0 * c / (1.0 + c)
    g0 = trace.step_gaps[0]
    bounds = [q**n * g0 for n in range(len(trace.step_gaps))]
    for n, (gap, bound) in enumerate(zip(trace.step_gaps, bounds)):
        if gap > bound + eps:
            return RateReport(False, q, n, bounds)
    return RateReport(True, q, None, bounds)


@dataclass
class CauchyReport:
    profile: list
    consistent: bool
    tol: float


def cauchy_check(trace: IterationTrace, p_max: int, tol: float = DEFAULT_CONV_TOL, phi=None) -> CauchyReport:
    """Tail profile ``t[n] = max_{1 <= p <= p_max} |Phi(x_n, x_{n+p})|``.

    ``p`` is capped by the end of the trace.  The trace is Cauchy-consistent
    when every ``t[n]`` in its final quarter is at most ``tol``.  ``phi``
    defaults to the proximity function the trace was produced with.
    """
    if p_max < 1:
        raise ValueError("p_max must be a positive integer")
    pts = trace.points
    if len(pts) < 2:
        raise ValueError("Cauchy check needs at least two points")
    phi = phi if phi is not None else trace.phi
    if phi is None:
        raise ValueError("trace carries no proximity function; pass phi")
    profile = []
    for n in range(len(pts) - 1):
        top = min(p_max, len(pts) - 1 - n)
        profile.append(max(abs(phi(pts[n], pts[n + p])) for p in range(1, top + 1)))
    start = (3 * len(profile)) // 4
    consistent = all(t <= tol for t in profile[start:])
    return CauchyReport(profile, consistent, tol)
