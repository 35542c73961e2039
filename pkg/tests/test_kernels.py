from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bestprox import _pykernels, kernels

BACKENDS = kernels.available_backends()
MODES = [kernels.PROXIMAL, kernels.P_PROXIMAL, kernels.P_STRICT]


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


def test_compiled_backend_built():
    # the editable install compiles the extension; skip only if built without it
    if "cython" not in BACKENDS:
        pytest.skip("compiled kernels not built in this environment")
    assert kernels.BACKEND == "cython"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.quad_scan(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros(1), backend="fortran")


# small grids of values make ties and equalities common
vals = st.sampled_from([0.0, 0.25, 0.5, 1.0, 1.5, 2.0])


@st.composite
def quad_inputs(draw):
    k = draw(st.integers(1, 7))
    lhs = np.array(draw(st.lists(vals, min_size=k * k, max_size=k * k))).reshape(k, k)
    bb = np.array(draw(st.lists(vals, min_size=k * k, max_size=k * k))).reshape(k, k)
    ab = np.array(draw(st.lists(vals, min_size=k, max_size=k)))
    distinct = draw(st.one_of(st.none(), st.lists(st.booleans(), min_size=k * k, max_size=k * k)))
    if distinct is not None:
        distinct = np.array(distinct).reshape(k, k)
    return lhs, bb, ab, distinct


def _reference_quad(lhs, bb, ab, distinct, mode, eps):
    """Plain double loop, written from the documented semantics."""
    k = lhs.shape[0]
    count, best, best_ij, viol = 0, -1.0, None, None
    for i in range(k):
        for j in range(k):
            if distinct is not None and not distinct[i, j]:
                continue
            count += 1
            l, r = lhs[i, j], bb[i, j]
            if mode != kernels.PROXIMAL:
                r = r + abs(ab[i] - ab[j])
            if r > eps and l / r > best:
                best, best_ij = l / r, (i, j)
            if viol is None:
                if mode == kernels.P_STRICT:
                    bad = not (l <= r - eps)
                elif r > eps:
                    bad = l >= r
                else:
                    bad = l > eps
                if bad:
                    viol = (i, j)
    return count, best, best_ij, viol


@given(quad_inputs(), st.sampled_from(MODES), st.integers(1, 5))
def test_quad_scan_matches_reference_on_all_backends(data, mode, threads):
    lhs, bb, ab, distinct = data
    want = _reference_quad(lhs, bb, ab, distinct, mode, 1e-9)
    for backend in BACKENDS:
        got = kernels.quad_scan(lhs, bb, ab, distinct, mode, 1e-9, threads, backend)
        assert got == want


@given(st.integers(1, 8), st.integers(0, 10_000), st.integers(1, 6))
def test_pair_scan_matches_reference(k, seed, threads):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 3, (k, k)).astype(float)
    b = a.copy()
    if rng.random() < 0.7:
        b[rng.integers(k), rng.integers(k)] += 1.0
    diff = np.argwhere(np.abs(a - b) > 1e-9)
    want = (k * k, tuple(int(v) for v in diff[0]) if len(diff) else None)
    for backend in BACKENDS:
        assert kernels.pair_scan(a, b, 1e-9, threads, backend) == want


@given(st.integers(1, 7), st.integers(0, 10_000), st.integers(1, 6))
def test_triangle_matches_reference(n, seed, threads):
    rng = np.random.default_rng(seed)
    p = rng.integers(0, 4, (n, n)).astype(float)
    want = None
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if want is None and p[x, z] > (p[x, y] + p[y, z]) + 1e-9:
                    want = (x, y, z)
    for backend in BACKENDS:
        assert kernels.triangle_first_violation(p, 1e-9, threads, backend) == want


def test_thread_count_does_not_change_results():
    rng = np.random.default_rng(7)
    k = 60
    lhs = rng.uniform(0, 1, (k, k))
    bb = rng.uniform(0, 1, (k, k))
    ab = rng.uniform(0, 1, k)
    for backend in BACKENDS:
        base = kernels.quad_scan(lhs, bb, ab, None, kernels.P_PROXIMAL, 1e-9, 1, backend)
        for t in (2, 3, 8, 200):
            assert kernels.quad_scan(lhs, bb, ab, None, kernels.P_PROXIMAL, 1e-9, t, backend) == base


def test_blocks_partition_rows():
    for n in range(0, 20):
        for t in range(1, 6):
            blocks = kernels._blocks(n, t)
            covered = [i for s, e in blocks for i in range(s, e)]
            assert covered == list(range(n))


def test_pykernels_empty_block():
    out = _pykernels.quad_scan(np.zeros((2, 2)), np.ones((2, 2)), np.zeros(2),
                               np.ones((2, 2), dtype=np.uint8), 0, 0, 1e-9, 1, 1)
    assert out[0] == 0 and out[4] == -1


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, BESTPROX_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import bestprox.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
