"""Point sets, proximity functions, mappings and the problem bundle.

Also hosts the set-level operations: the proximity distance between two
sets, the proximal subsets, and a sampled audit of the metric-like axioms
the main existence theorem assumes of the proximity function.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .expr import EvalError, Expression, check_bound, evaluate, evaluate_array, parse

log = logging.getLogger(__name__)

EPS_DUP = 1e-12
DEFAULT_EPS_EQ = 1e-9
DEFAULT_SAMPLES = 101

Point = tuple


class InstanceError(ValueError):
    """An instance (or one of its parts) violates a structural invariant."""


def as_point(coords) -> Point:
    pt = tuple(float(c) for c in coords)
    if not pt:
        raise InstanceError("a point needs at least one coordinate")
    if not all(math.isfinite(c) for c in pt):
        raise InstanceError(f"point {pt} has a non-finite coordinate")
    return pt


def same_point(x: Sequence[float], y: Sequence[float], tol: float = EPS_DUP) -> bool:
    return len(x) == len(y) and all(abs(a - b) <= tol for a, b in zip(x, y))


def format_point(pt: Sequence[float]) -> str:
    return "(" + ", ".join(f"{c:.12g}" for c in pt) + ")"


# ------------------------------------------------------------------ sets


@dataclass(frozen=True)
class Segment:
    """Sampling recipe ``start + (i/(samples-1)) * (end - start)``."""

    start: Point
    end: Point
    samples: int

    def points(self) -> tuple:
        n = self.samples
        if n == 1:
            return (self.start,)
        out = []
        for i in range(n):
            t = i / (n - 1)
            out.append(tuple(a + t * (b - a) for a, b in zip(self.start, self.end)))
        return tuple(out)

    @property
    def spacing(self) -> float:
        """Largest per-coordinate gap between consecutive samples."""
        if self.samples == 1:
            return 0.0
        return max(abs(b - a) for a, b in zip(self.start, self.end)) / (self.samples - 1)


@dataclass(frozen=True)
class PointSet:
    points: tuple
    label: str = ""
    source: Optional[Segment] = None

    def __post_init__(self):
        pts = tuple(as_point(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise InstanceError(f"point set {self.label!r} is empty")
        dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise InstanceError(f"point set {self.label!r} mixes dimensions")
        arr = np.asarray(pts)
        for i in range(1, len(pts)):
            close = np.all(np.abs(arr[:i] - arr[i]) <= EPS_DUP, axis=1)
            if close.any():
                j = int(np.argmax(close))
                raise InstanceError(
                    f"point set {self.label!r} has duplicate points at indices {j} and {i}"
                )

    @classmethod
    def explicit(cls, points, label: str = "") -> "PointSet":
        return cls(tuple(points), label)

    @classmethod
    def segment(cls, start, end, samples: int = DEFAULT_SAMPLES, label: str = "") -> "PointSet":
        if int(samples) != samples or samples < 1:
            raise InstanceError(f"segment sample count must be a positive integer, got {samples!r}")
        seg = Segment(as_point(start), as_point(end), int(samples))
        if len(seg.start) != len(seg.end):
            raise InstanceError("segment endpoints differ in dimension")
        return cls(seg.points(), label, seg)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def sampled(self) -> bool:
        return self.source is not None

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64).reshape(len(self.points), self.dim)

    def subset(self, indices, label: Optional[str] = None) -> "PointSet":
        return PointSet(tuple(self.points[i] for i in indices), label or self.label)

    def index_of(self, pt, tol: float = EPS_DUP) -> Optional[int]:
        for i, p in enumerate(self.points):
            if same_point(p, pt, tol):
                return i
        return None


# ------------------------------------------------------- functions and maps


def _names(prefix: str, dim: int) -> list:
    return [f"{prefix}{i + 1}" for i in range(dim)]


def _bindings(x: Sequence[float], y: Optional[Sequence[float]] = None) -> dict:
    env = {f"a{i + 1}": float(c) for i, c in enumerate(x)}
    if y is not None:
        env.update({f"b{i + 1}": float(c) for i, c in enumerate(y)})
    return env


@dataclass(frozen=True)
class ProximityFunction:
    """Real-valued function of two points, written over ``a1..ak, b1..bk``."""

    expr: Expression
    dim: int

    def __post_init__(self):
        check_bound(self.expr, _names("a", self.dim) + _names("b", self.dim))

    @classmethod
    def from_source(cls, source: str, dim: int) -> "ProximityFunction":
        return cls(parse(source), dim)

    def __call__(self, x, y) -> float:
        return evaluate(self.expr, _bindings(x, y))

    def matrix(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """``out[i, j] = phi(xs[i], ys[j])``."""
        xs = np.asarray(xs, dtype=np.float64).reshape(-1, self.dim)
        ys = np.asarray(ys, dtype=np.float64).reshape(-1, self.dim)
        env = {}
        for i in range(self.dim):
            env[f"a{i + 1}"] = xs[:, i][:, None]
            env[f"b{i + 1}"] = ys[:, i][None, :]
        shape = (xs.shape[0], ys.shape[0])
        return np.ascontiguousarray(evaluate_array(self.expr, env, shape), dtype=np.float64)

    def abs_matrix(self, xs, ys) -> np.ndarray:
        return np.abs(self.matrix(xs, ys))

    def scaled(self, factor: float) -> "ProximityFunction":
        return ProximityFunction(parse(f"{factor!r} * ({self.expr.source})"), self.dim)

    @property
    def source(self) -> str:
        return self.expr.source


@dataclass(frozen=True)
class Branch:
    """One piece of a piecewise map: active where ``when >= 0`` (always, if ``when`` is None)."""

    values: tuple
    when: Optional[Expression] = None


@dataclass(frozen=True)
class MappingF:
    branches: tuple
    dim: int

    def __post_init__(self):
        if not self.branches:
            raise InstanceError("mapping needs at least one branch")
        allowed = _names("a", self.dim)
        for branch in self.branches:
            if len(branch.values) != self.dim:
                raise InstanceError(
                    f"mapping branch has {len(branch.values)} components, instance dimension is {self.dim}"
                )
            for e in branch.values:
                check_bound(e, allowed)
            if branch.when is not None:
                check_bound(branch.when, allowed)

    @classmethod
    def from_sources(cls, branches, dim: int) -> "MappingF":
        """``branches`` is a list of ``(when_source_or_None, [component sources])``."""
        built = []
        for when, values in branches:
            built.append(
                Branch(tuple(parse(v) for v in values), None if when is None else parse(when))
            )
        return cls(tuple(built), dim)

    @classmethod
    def simple(cls, values, dim: int) -> "MappingF":
        return cls.from_sources([(None, values)], dim)

    def __call__(self, x) -> Point:
        env = _bindings(x)
        for branch in self.branches:
            if branch.when is None or evaluate(branch.when, env) >= 0.0:
                return tuple(evaluate(e, env) for e in branch.values)
        raise EvalError(f"no mapping branch is active at {format_point(x)}")

    def image(self, points) -> np.ndarray:
        return np.asarray([self(p) for p in points], dtype=np.float64).reshape(-1, self.dim)


@dataclass(frozen=True)
class Assumptions:
    """Hypotheses that cannot be checked on a finite sample; recorded as declared."""

    phi_complete: bool = False
    approx_phi_compact: bool = False


@dataclass(frozen=True)
class ProblemInstance:
    Re: PointSet
    Om: PointSet
    F: MappingF
    Phi: ProximityFunction
    eps_eq: float = DEFAULT_EPS_EQ
    assumptions: Assumptions = field(default_factory=Assumptions)
    name: str = ""
    step_feas_tol: Optional[float] = None
    range_tol: Optional[float] = None

    def __post_init__(self):
        if self.Re.dim != self.Om.dim:
            raise InstanceError(f"Re has dimension {self.Re.dim}, Om has {self.Om.dim}")
        if self.Phi.dim != self.Re.dim or self.F.dim != self.Re.dim:
            raise InstanceError("Phi and F must use the dimension of the point sets")
        if not (self.eps_eq > 0 and math.isfinite(self.eps_eq)):
            raise InstanceError(f"eps_eq must be a positive finite real, got {self.eps_eq!r}")
        for name in ("step_feas_tol", "range_tol"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 and math.isfinite(value)):
                raise InstanceError(f"{name} must be a non-negative finite real, got {value!r}")

    @property
    def dim(self) -> int:
        return self.Re.dim

    @property
    def sampled(self) -> bool:
        return self.Re.sampled or self.Om.sampled

    def membership_tol(self) -> float:
        """Tolerance for "this point belongs to a sampled subset of Om".

        Explicit sets use ``eps_eq``; a sampled Om also admits half its
        sample spacing (plus ``eps_eq``, so midpoints count despite
        rounding), because the sample only represents the continuum to that
        resolution.
        """
        if self.range_tol is not None:
            return self.range_tol
        if self.Om.source is not None:
            return 0.5 * self.Om.source.spacing + self.eps_eq
        return self.eps_eq

    def with_phi(self, phi: ProximityFunction) -> "ProblemInstance":
        return ProblemInstance(
            self.Re, self.Om, self.F, phi, self.eps_eq, self.assumptions, self.name,
            self.step_feas_tol, self.range_tol,
        )

    def with_eps(self, eps_eq: float) -> "ProblemInstance":
        return ProblemInstance(
            self.Re, self.Om, self.F, self.Phi, eps_eq, self.assumptions, self.name,
            self.step_feas_tol, self.range_tol,
        )


# ------------------------------------------------------------- operations


def d_phi(Re: PointSet, Om: PointSet, Phi: ProximityFunction) -> float:
    """Smallest ``|Phi(a, b)|`` over ``a`` in ``Re`` and ``b`` in ``Om``."""
    if Re.dim != Om.dim:
        raise InstanceError("dimension mismatch between the two sets")
    return float(Phi.abs_matrix(Re.array(), Om.array()).min())


def proximal_subsets(inst: ProblemInstance) -> tuple:
    """Members of Re (resp. Om) achieving the proximity distance against some partner.

    On finite sets the minimum is attained, so neither subset is ever empty.
    Parent order is preserved.
    """
    _, re_idx, om_idx = proximal_indices(inst)
    return (
        inst.Re.subset(re_idx, inst.Re.label + "_Phi"),
        inst.Om.subset(om_idx, inst.Om.label + "_Phi"),
    )


def proximal_indices(inst: ProblemInstance) -> tuple:
    """Index form of :func:`proximal_subsets`: ``(D, re_indices, om_indices)``."""
    M = inst.Phi.abs_matrix(inst.Re.array(), inst.Om.array())
    D = float(M.min())
    hit = np.abs(M - D) <= inst.eps_eq
    return D, np.flatnonzero(hit.any(axis=1)), np.flatnonzero(hit.any(axis=0))


def apply_F(inst: ProblemInstance, x) -> Point:
    return inst.F(as_point(x))


def range_warnings(inst: ProblemInstance) -> list:
    """Points of Re whose image lands farther than eps_eq from every point of Om."""
    images = inst.F.image(inst.Re.points)
    om = inst.Om.array()
    out = []
    for i, img in enumerate(images):
        dist = float(np.min(np.max(np.abs(om - img), axis=1)))
        if dist > inst.eps_eq:
            out.append((i, tuple(img.tolist()), dist))
    if out:
        log.warning(
            "%s: F maps %d of %d points of Re outside Om (max distance %.3g)",
            inst.name or "instance", len(out), len(inst.Re), max(d for _, _, d in out),
        )
    return out


@dataclass
class AxiomVerdict:
    holds: bool
    witness: Optional[tuple] = None
    values: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "witness": None if self.witness is None else [list(p) for p in self.witness],
            "values": None if self.values is None else list(self.values),
        }


@dataclass
class AxiomReport:
    zero_iff_equal: AxiomVerdict
    symmetric: AxiomVerdict
    triangle: AxiomVerdict
    sample_size: int

    @property
    def all_hold(self) -> bool:
        return self.zero_iff_equal.holds and self.symmetric.holds and self.triangle.holds

    def to_dict(self) -> dict:
        return {
            "definition": "phi-axioms",
            "verdict": "holds" if self.all_hold else "fails",
            "zero_iff_equal": self.zero_iff_equal.to_dict(),
            "symmetric": self.symmetric.to_dict(),
            "triangle": self.triangle.to_dict(),
            "sample_size": self.sample_size,
        }


def axiom_sample(inst: ProblemInstance) -> np.ndarray:
    """Re, Om and F(Re) merged in that order, dropping repeats within EPS_DUP."""
    stacked = np.vstack([inst.Re.array(), inst.Om.array(), inst.F.image(inst.Re.points)])
    keep = []
    for i in range(len(stacked)):
        if keep:
            prev = stacked[keep]
            if np.any(np.all(np.abs(prev - stacked[i]) <= EPS_DUP, axis=1)):
                continue
        keep.append(i)
    return stacked[keep]


def check_phi_axioms(inst: ProblemInstance, threads: int = 1) -> AxiomReport:
    """Exhaustive audit of zero-iff-equal, symmetry and the triangle inequality.

    Every check is restricted to the finite sample of :func:`axiom_sample`;
    the first violation in index order is reported as the witness.
    """
    S = axiom_sample(inst)
    eps = inst.eps_eq
    P = inst.Phi.abs_matrix(S, S)
    n = len(S)
    pts = [tuple(row.tolist()) for row in S]

    # S is deduplicated, so x == y within EPS_DUP exactly when the indices agree
    zero = P <= eps
    bad = zero != np.eye(n, dtype=bool)
    if bad.any():
        i, j = divmod(int(np.argmax(bad.ravel())), n)
        zero_v = AxiomVerdict(False, (pts[i], pts[j]), (float(P[i, j]),))
    else:
        zero_v = AxiomVerdict(True)

    asym = np.abs(P - P.T) > eps
    if asym.any():
        i, j = divmod(int(np.argmax(asym.ravel())), n)
        sym_v = AxiomVerdict(False, (pts[i], pts[j]), (float(P[i, j]), float(P[j, i])))
    else:
        sym_v = AxiomVerdict(True)

    hit = kernels.triangle_first_violation(P, eps, threads)
    if hit is None:
        tri_v = AxiomVerdict(True)
    else:
        x, y, z = hit
        tri_v = AxiomVerdict(
            False, (pts[x], pts[y], pts[z]), (float(P[x, z]), float(P[x, y]), float(P[y, z]))
        )
    return AxiomReport(zero_v, sym_v, tri_v, n)
