"""Synthetic instances: seeded random orbits and the halving instance.

Distribution (2-D, all draws from ``numpy.random.default_rng(seed)``):

* a fixed point ``x*`` uniform in [-0.25, 0.25]^2 and an offset whose
  coordinates have magnitude uniform in [0.5, 0.75] and a random sign, so
  the start ``x0 = x* + offset`` lies in [-1, 1]^2;
* ``F(x) = x* + R (x - x*)`` with ``R = diag(r1, r2)``: one coordinate,
  chosen at random, gets ``|r|`` uniform in [0.27, 0.30], the other
  ``|r|`` uniform in [0.05, that value]; signs are random;
* ``Re`` is the first ``n`` points of the orbit of ``x0`` and ``Om = F(Re)``,
  computed through the expression engine so images coincide with set
  members bit for bit;
* ``Phi`` is the l1 distance.

With ``n = 20`` the rate band keeps consecutive orbit points more than
``EPS_DUP`` apart while the step gaps fall below 1e-9 before the orbit ends.
"""
from __future__ import annotations

import numpy as np

from .core import MappingF, PointSet, ProblemInstance, ProximityFunction

L1 = "abs(a1 - b1) + abs(a2 - b2)"


def random_instance(seed: int, n: int = 20) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    fixed = rng.uniform(-0.25, 0.25, size=2)
    offset = rng.uniform(0.5, 0.75, size=2) * rng.choice([-1.0, 1.0], size=2)
    slow = int(rng.integers(2))
    rates = np.empty(2)
    rates[slow] = rng.uniform(0.27, 0.30)
    rates[1 - slow] = rng.uniform(0.05, rates[slow])
    rates *= rng.choice([-1.0, 1.0], size=2)
    shifts = fixed * (1.0 - rates)
    comps = [f"{float(rates[i])!r} * a{i + 1} + {float(shifts[i])!r}" for i in range(2)]
    F = MappingF.simple(comps, 2)

    orbit = [tuple(float(c) for c in fixed + offset)]
    while len(orbit) < n:
        orbit.append(F(orbit[-1]))
    Re = PointSet.explicit(orbit, "Re")
    Om = PointSet.explicit([F(p) for p in orbit], "Om")
    return ProblemInstance(Re, Om, F, ProximityFunction.from_source(L1, 2), name=f"random-{seed}")


def halving_instance(levels: int = 36) -> ProblemInstance:
    """``Re = Om = {0} x ({1, 1/2, ..., 2^-levels} u {0})``, ``Phi = a2 - b2``, ``F(0, t) = (0, t/2)``.

    Antecedent pairs are exactly ``alpha = beta / 2``, so every contraction
    ratio equals 1/3 and the iteration from (0, 1) halves its gap each step.
    All values are exact dyadics, so ``eps_eq`` is set far below the smallest
    nonzero point; the default 1e-9 would pair 0 with points near 2^-30.
    """
    pts = [(0.0, 2.0 ** -n) for n in range(levels + 1)] + [(0.0, 0.0)]
    Re = PointSet.explicit(pts, "Re")
    Om = PointSet.explicit(pts, "Om")
    F = MappingF.simple(["0", "a2/2"], 2)
    return ProblemInstance(Re, Om, F, ProximityFunction.from_source("a2 - b2", 2), eps_eq=1e-13, name="halving")
