"""Kernel backend selection and thread-parallel drivers.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback in ``_pykernels``.  Set ``BESTPROX_PURE_PYTHON=1`` to force
the fallback.  ``BACKEND`` names the active choice.

Work is split into contiguous row blocks, one per thread, and reduced in
block order, so results do not depend on the thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

_py = _pykernels
_c = None
if os.environ.get("BESTPROX_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _c
    except ImportError:  # extension not built
        _c = None

BACKEND = "cython" if _c is not None else "python"

PROXIMAL, P_PROXIMAL, P_STRICT = 0, 1, 2


def _impl(backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _c is None:
            raise RuntimeError("compiled kernels are not available")
        return _c
    if backend == "python":
        return _py
    raise ValueError(f"unknown backend {backend!r}")


def available_backends() -> list:
    return ["python"] + (["cython"] if _c is not None else [])


def _blocks(n: int, threads: int) -> list:
    threads = max(1, min(int(threads), n)) if n else 1
    step, extra = divmod(n, threads)
    out, start = [], 0
    for t in range(threads):
        end = start + step + (1 if t < extra else 0)
        out.append((start, end))
        start = end
    return out


def _run(fn, args, n, threads):
    blocks = _blocks(n, threads)
    if len(blocks) == 1:
        return [fn(*args, *blocks[0])]
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        return list(pool.map(lambda b: fn(*args, *b), blocks))


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def quad_scan(lhs, bb, ab, distinct=None, mode=P_PROXIMAL, eps=1e-9, threads=1, backend=None):
    """Scan ordered pairs ``(i, j)`` of antecedent pairs.

    Returns ``(count, best_ratio, best_ij, violation_ij)`` where
    ``best_ratio`` is the largest ``lhs / rhs`` over cells with ``rhs > eps``
    (``-1.0`` if there are none) and ``violation_ij`` is the first cell in
    row-major order that breaks the inequality of ``mode``.  Index pairs are
    ``None`` when absent.
    """
    impl = _impl(backend)
    lhs, bb, ab = _f64(lhs), _f64(bb), _f64(ab)
    k = lhs.shape[0]
    if distinct is None:
        mask, require = np.ones((k, k), dtype=np.uint8), 0
    else:
        mask, require = np.ascontiguousarray(distinct, dtype=np.uint8), 1
    parts = _run(impl.quad_scan, (lhs, bb, ab, mask, require, int(mode), float(eps)), k, threads)
    count, best, best_ij, viol = 0, -1.0, None, None
    for c, b, bi, bj, vi, vj in parts:
        count += c
        if bi >= 0 and b > best:
            best, best_ij = b, (bi, bj)
        if viol is None and vi >= 0:
            viol = (vi, vj)
    return count, best, best_ij, viol


def pair_scan(a, b, eps=1e-9, threads=1, backend=None):
    """First ``(i, j)`` with ``|a[i,j] - b[i,j]| > eps``; returns ``(count, ij or None)``."""
    impl = _impl(backend)
    a, b = _f64(a), _f64(b)
    parts = _run(impl.pair_scan, (a, b, float(eps)), a.shape[0], threads)
    count, viol = 0, None
    for c, vi, vj in parts:
        count += c
        if viol is None and vi >= 0:
            viol = (vi, vj)
    return count, viol


def triangle_first_violation(p, eps=1e-9, threads=1, backend=None):
    """First ``(x, y, z)`` with ``p[x,z] > p[x,y] + p[y,z] + eps``, or ``None``."""
    impl = _impl(backend)
    p = _f64(p)
    for x, y, z in _run(impl.triangle_scan, (p, float(eps)), p.shape[0], threads):
        if x >= 0:
            return x, y, z
    return None
