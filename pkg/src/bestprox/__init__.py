"""Best proximity points of proximal contractions on finite samples.

Checks the contraction-type conditions exhaustively, runs the proximal
Picard iteration and compares it with a brute-force oracle.
"""
from __future__ import annotations

from .checkers import CHECKS, CheckReport, run_checks
from .core import (
    Assumptions,
    MappingF,
    PointSet,
    ProblemInstance,
    ProximityFunction,
    apply_F,
    check_phi_axioms,
    d_phi,
    proximal_subsets,
)
from .corpus import load_builtin, run_regressions
from .expr import parse
from .kernels import BACKEND
from .oracle import brute_force_bpp, oracle_vs_solver
from .problem_file import validate_file
from .solver import IterationTrace, iterate, proximal_step

__version__ = "0.1.0"

__all__ = [
    "Assumptions", "BACKEND", "CHECKS", "CheckReport", "IterationTrace", "MappingF", "PointSet",
    "ProblemInstance", "ProximityFunction", "apply_F", "brute_force_bpp", "check_phi_axioms",
    "d_phi", "iterate", "load_builtin", "oracle_vs_solver", "parse", "proximal_step",
    "proximal_subsets", "run_checks", "run_regressions", "validate_file",
]
