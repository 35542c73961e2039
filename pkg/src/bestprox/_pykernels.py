"""Numpy versions of the scan kernels, used when the extension is not built.

Results are identical to ``_ckernels`` bit for bit: the same IEEE operations
are applied in the same order and ties resolve to the first row-major index.
"""
import numpy as np


def quad_scan(lhs, bb, ab, distinct, require_distinct, mode, eps, start, end):
    lhs = lhs[start:end]
    r = bb[start:end]
    if mode != 0:
        r = r + np.abs(ab[start:end, None] - ab[None, :])
    if require_distinct:
        domain = distinct[start:end].astype(bool)
    else:
        domain = np.ones(lhs.shape, dtype=bool)
    count = int(domain.sum())

    positive = domain & (r > eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(positive, lhs / np.where(positive, r, 1.0), -1.0)
    best, bi, bj = -1.0, -1, -1
    if positive.any():
        flat = int(np.argmax(ratio))
        bi, bj = divmod(flat, lhs.shape[1])
        best = float(ratio[bi, bj])
        bi += start

    if mode == 2:
        bad = ~(lhs <= r - eps)
    else:
        bad = np.where(r > eps, lhs >= r, lhs > eps)
    bad &= domain
    vi = vj = -1
    if bad.any():
        vi, vj = divmod(int(np.argmax(bad)), lhs.shape[1])
        vi += start
    return count, best, bi, bj, vi, vj


def pair_scan(a, b, eps, start, end):
    k = a.shape[1]
    bad = np.abs(a[start:end] - b[start:end]) > eps
    vi = vj = -1
    if bad.any():
        vi, vj = divmod(int(np.argmax(bad)), k)
        vi += start
    return (end - start) * k, vi, vj


def triangle_scan(p, eps, start, end):
    for x in range(start, end):
        # bound[y, z] = p[x, y] + p[y, z] + eps
        bound = (p[x][:, None] + p) + eps
        bad = p[x][None, :] > bound
        if bad.any():
            y, z = divmod(int(np.argmax(bad)), p.shape[0])
            return x, y, z
    return -1, -1, -1
