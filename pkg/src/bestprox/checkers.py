"""Exhaustive verification of the contraction-type conditions on a finite instance.

Every checker scans the whole instance and returns a :class:`CheckReport`.
Verdicts are relative to the sample and to ``eps_eq``:

* ``holds``: no violation anywhere in the scanned domain,
* ``fails``: the first violation in index order is reported as the witness,
* ``vacuous``: nothing satisfies the antecedent (or the quantifier domain
  is empty), so the condition is never exercised.

Conditions with a contraction constant also report ``min_c``, the smallest
constant that works on the sample (the largest observed ratio, floored at
``MIN_C_FLOOR``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import kernels
from .core import ProblemInstance, check_phi_axioms

MIN_C_FLOOR = 1e-6

HOLDS, FAILS, VACUOUS = "holds", "fails", "vacuous"


def _pt(row) -> list:
    return [float(c) for c in row]


@dataclass
class CheckReport:
    definition: str
    verdict: str
    min_c: Optional[float] = None
    witness: Optional[dict] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    pairs_scanned: int = 0
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {
            "definition": self.definition,
            "verdict": self.verdict,
            "min_c": self.min_c,
            "witness": self.witness,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "pairs_scanned": self.pairs_scanned,
            "details": self.details,
        }


class Scan:
    """Lazily computed |Phi| tables shared by the checkers for one instance."""

    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.eps = inst.eps_eq

    @cached_property
    def re(self) -> np.ndarray:
        return self.inst.Re.array()

    @cached_property
    def om(self) -> np.ndarray:
        return self.inst.Om.array()

    @cached_property
    def images(self) -> np.ndarray:
        return self.inst.F.image(self.inst.Re.points)

    @cached_property
    def re_om(self) -> np.ndarray:
        return self.inst.Phi.abs_matrix(self.re, self.om)

    @cached_property
    def re_re(self) -> np.ndarray:
        return self.inst.Phi.abs_matrix(self.re, self.re)

    @cached_property
    def om_om(self) -> np.ndarray:
        return self.inst.Phi.abs_matrix(self.om, self.om)

    @cached_property
    def re_img(self) -> np.ndarray:
        """``[a, b] = |Phi(Re[a], F(Re[b]))|``."""
        return self.inst.Phi.abs_matrix(self.re, self.images)

    @cached_property
    def D(self) -> float:
        return float(self.re_om.min())

    @cached_property
    def proximal(self) -> tuple:
        hit = np.abs(self.re_om - self.D) <= self.eps
        return np.flatnonzero(hit.any(axis=1)), np.flatnonzero(hit.any(axis=0))

    @cached_property
    def antecedent(self) -> tuple:
        """Index arrays ``(alpha, beta)`` into Re, alpha-major order."""
        hit = np.abs(self.re_img - self.D) <= self.eps
        a, b = np.nonzero(hit)
        return a, b


def antecedent_pairs(inst: ProblemInstance, scan: Optional[Scan] = None) -> list:
    """All ``(alpha, beta)`` in Re x Re with ``|Phi(alpha, F(beta))| = D`` within eps_eq."""
    scan = scan or Scan(inst)
    a, b = scan.antecedent
    pts = inst.Re.points
    return [(pts[i], pts[j]) for i, j in zip(a.tolist(), b.tolist())]


def check_p_property(inst: ProblemInstance, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    """Cross pairs attaining D must have equal |Phi| gaps within each set."""
    scan = scan or Scan(inst)
    hit = np.abs(scan.re_om - scan.D) <= scan.eps
    ai, bi = np.nonzero(hit)
    name = "p-property"
    if len(ai) == 0:
        return CheckReport(name, VACUOUS, details={"reason": "no pair attains D"})
    A = scan.re_re[np.ix_(ai, ai)]
    B = scan.om_om[np.ix_(bi, bi)]
    count, viol = kernels.pair_scan(A, B, scan.eps, threads)
    details = {"proximal_pairs": int(len(ai)), "D": scan.D}
    if viol is None:
        return CheckReport(name, HOLDS, pairs_scanned=count, details=details)
    i, j = viol
    witness = {
        "alpha1": _pt(scan.re[ai[i]]),
        "beta1": _pt(scan.om[bi[i]]),
        "alpha2": _pt(scan.re[ai[j]]),
        "beta2": _pt(scan.om[bi[j]]),
    }
    return CheckReport(name, FAILS, witness=witness, lhs=float(A[i, j]), rhs=float(B[i, j]),
                       pairs_scanned=count, details=details)


def _contraction(inst, name, mode, require_distinct, threads, scan) -> CheckReport:
    scan = scan or Scan(inst)
    a, b = scan.antecedent
    details = {"antecedent_pairs": int(len(a)), "D": scan.D}
    if len(a) == 0:
        details["reason"] = "no (alpha, beta) satisfies |Phi(alpha, F(beta))| = D"
        return CheckReport(name, VACUOUS, details=details)
    if require_distinct and len(inst.Re) < 2:
        details["reason"] = "Re has no two distinct points to serve as beta1 != beta2"
        return CheckReport(name, VACUOUS, details=details)

    P = scan.re_re
    lhs = P[np.ix_(a, a)]
    bb = P[np.ix_(b, b)]
    ab = P[a, b]
    # Re carries no duplicates within EPS_DUP, so distinct indices are distinct points
    distinct = (b[:, None] != b[None, :]) if require_distinct else None
    count, best, best_ij, viol = kernels.quad_scan(lhs, bb, ab, distinct, mode, scan.eps, threads)

    if viol is not None:
        i, j = viol
        rhs = float(bb[i, j]) if mode == kernels.PROXIMAL else float(bb[i, j] + abs(ab[i] - ab[j]))
        witness = {
            "alpha1": _pt(scan.re[a[i]]),
            "alpha2": _pt(scan.re[a[j]]),
            "beta1": _pt(scan.re[b[i]]),
            "beta2": _pt(scan.re[b[j]]),
        }
        if best_ij is not None:
            details["max_ratio"] = best
        return CheckReport(name, FAILS, witness=witness, lhs=float(lhs[i, j]), rhs=rhs,
                           pairs_scanned=count, details=details)

    min_c = None
    if mode != kernels.P_STRICT:
        min_c = max(best, MIN_C_FLOOR) if best_ij is not None else MIN_C_FLOOR
    if best_ij is not None:
        details["max_ratio"] = best
        i, j = best_ij
        details["tightest"] = {
            "alpha1": _pt(scan.re[a[i]]),
            "alpha2": _pt(scan.re[a[j]]),
            "beta1": _pt(scan.re[b[i]]),
            "beta2": _pt(scan.re[b[j]]),
        }
    return CheckReport(name, HOLDS, min_c=min_c, pairs_scanned=count, details=details)


def check_proximal_contraction(inst, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    """``|Phi(a1, a2)| <= c |Phi(b1, b2)|`` over all antecedent quadruples, b1 == b2 allowed."""
    return _contraction(inst, "proximal-contraction", kernels.PROXIMAL, False, threads, scan)


def check_modified_proximal_contraction(inst, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    return _contraction(inst, "modified-proximal-contraction", kernels.PROXIMAL, True, threads, scan)


def check_p_proximal_contraction(inst, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    """Contraction bound with the correction term ``||Phi(a1,b1)| - |Phi(a2,b2)||``, b1 != b2."""
    return _contraction(inst, "p-proximal-contraction", kernels.P_PROXIMAL, True, threads, scan)


def check_p_proximal_contractive(inst, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    """Strict, constant-free version; ``<`` is read as ``<= rhs - eps_eq``."""
    return _contraction(inst, "p-proximal-contractive", kernels.P_STRICT, True, threads, scan)


def check_range_condition(inst, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    """Every image of the proximal part of Re must land in the proximal part of Om.

    Membership uses the max-coordinate distance against
    ``inst.membership_tol()``.
    """
    scan = scan or Scan(inst)
    re_idx, om_idx = scan.proximal
    name = "range-condition"
    tol = inst.membership_tol()
    details = {"Re_Phi": int(len(re_idx)), "Om_Phi": int(len(om_idx)), "tolerance": tol}
    if len(re_idx) == 0:
        details["reason"] = "Re_Phi is empty"
        return CheckReport(name, FAILS, details=details)
    om_phi = scan.om[om_idx]
    for n, i in enumerate(re_idx.tolist()):
        img = scan.images[i]
        dist = np.max(np.abs(om_phi - img), axis=1)
        k = int(np.argmin(dist))
        if dist[k] > tol:
            witness = {"alpha": _pt(scan.re[i]), "image": _pt(img), "nearest": _pt(om_phi[k])}
            return CheckReport(name, FAILS, witness=witness, lhs=float(dist[k]), rhs=tol,
                               pairs_scanned=(n + 1) * len(om_idx), details=details)
    return CheckReport(name, HOLDS, pairs_scanned=len(re_idx) * len(om_idx), details=details)


def check_thm2_hypotheses(inst, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    """Hypotheses of the existence theorem for p-proximal contractive maps.

    (a) the p-property, (b) the range condition, and (c) some xi, lam in
    Re_Phi with ``|Phi(xi, F(lam))| = D`` and
    ``|Phi(xi, lam)| <= |Phi(F(xi), F(lam))|``.
    """
    scan = scan or Scan(inst)
    name = "thm2-hypotheses"
    re_idx, _ = scan.proximal
    if len(re_idx) == 0:
        return CheckReport(name, VACUOUS, details={"reason": "Re_Phi is empty"})
    prop = check_p_property(inst, threads, scan)
    rng = check_range_condition(inst, threads, scan)

    img = scan.images[re_idx]
    eq = np.abs(scan.re_img[np.ix_(re_idx, re_idx)] - scan.D) <= scan.eps
    gap = scan.re_re[np.ix_(re_idx, re_idx)]
    img_gap = inst.Phi.abs_matrix(img, img)
    ok = eq & (gap <= img_gap + scan.eps)
    found = None
    if ok.any():
        i, j = divmod(int(np.argmax(ok)), len(re_idx))
        found = (int(re_idx[i]), int(re_idx[j]))

    details = {"p_property": prop.verdict, "range_condition": rng.verdict,
               "exists_xi_lambda": found is not None}
    scanned = prop.pairs_scanned + rng.pairs_scanned + len(re_idx) ** 2
    if found is not None:
        details["xi"] = _pt(scan.re[found[0]])
        details["lambda"] = _pt(scan.re[found[1]])
    if prop.verdict == FAILS:
        return CheckReport(name, FAILS, witness=prop.witness, lhs=prop.lhs, rhs=prop.rhs,
                           pairs_scanned=scanned, details=details)
    if rng.verdict == FAILS:
        return CheckReport(name, FAILS, witness=rng.witness, lhs=rng.lhs, rhs=rng.rhs,
                           pairs_scanned=scanned, details=details)
    if found is None:
        details["reason"] = "no xi, lambda in Re_Phi satisfy both conditions"
        witness = lhs = rhs = None
        if eq.any():
            # closest miss among pairs meeting the equality
            excess = np.where(eq, gap - img_gap, np.inf)
            i, j = divmod(int(np.argmin(excess)), len(re_idx))
            witness = {"xi": _pt(scan.re[re_idx[i]]), "lambda": _pt(scan.re[re_idx[j]])}
            lhs, rhs = float(gap[i, j]), float(img_gap[i, j])
        return CheckReport(name, FAILS, witness=witness, lhs=lhs, rhs=rhs,
                           pairs_scanned=scanned, details=details)
    verdict = HOLDS if prop.verdict == HOLDS else VACUOUS
    return CheckReport(name, verdict, pairs_scanned=scanned, details=details)


def axiom_check(inst, threads: int = 1, scan: Optional[Scan] = None) -> CheckReport:
    """The Phi axiom audit wrapped as a report, so it can run alongside the checkers."""
    rep = check_phi_axioms(inst, threads)
    d = rep.to_dict()
    witness = lhs = rhs = None
    for key in ("zero_iff_equal", "symmetric", "triangle"):
        sub = getattr(rep, key)
        if not sub.holds:
            witness = {"axiom": key, "points": [list(p) for p in sub.witness]}
            if key == "triangle":
                lhs, rhs = sub.values[0], sub.values[1] + sub.values[2]
            elif key == "symmetric":
                lhs, rhs = sub.values
            else:
                lhs, rhs = sub.values[0], 0.0
            break
    details = {k: d[k]["holds"] for k in ("zero_iff_equal", "symmetric", "triangle")}
    details["sample_size"] = rep.sample_size
    n = rep.sample_size
    return CheckReport("phi-axioms", d["verdict"], witness=witness, lhs=lhs, rhs=rhs,
                       pairs_scanned=n * n, details=details)


CHECKS = {
    "phi-axioms": axiom_check,
    "p-property": check_p_property,
    "proximal-contraction": check_proximal_contraction,
    "modified-proximal-contraction": check_modified_proximal_contraction,
    "p-proximal-contraction": check_p_proximal_contraction,
    "p-proximal-contractive": check_p_proximal_contractive,
    "range-condition": check_range_condition,
    "thm2-hypotheses": check_thm2_hypotheses,
}


def run_checks(inst: ProblemInstance, names=None, threads: int = 1) -> list:
    names = list(CHECKS) if not names else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    scan = Scan(inst)
    return [CHECKS[n](inst, threads=threads, scan=scan) for n in names]


def thm1_hypotheses_hold(inst: ProblemInstance, threads: int = 1) -> bool:
    """True when every checkable hypothesis of the main existence theorem holds."""
    scan = Scan(inst)
    return (
        check_phi_axioms(inst, threads).all_hold
        and check_p_proximal_contraction(inst, threads, scan).verdict == HOLDS
        and check_range_condition(inst, threads, scan).verdict == HOLDS
    )
