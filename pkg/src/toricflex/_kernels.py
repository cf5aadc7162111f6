"""Integer box-scan kernels.

Each kernel has a numba implementation and a pure numpy one. The numba
path is used when numba imports and TORICFLEX_NUMBA is not "0".
All inputs are int64 arrays; callers keep entries small (desk scale).
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("TORICFLEX_NUMBA", "1") != "0"

_LIMIT = 1 << 40


def _box(lo, hi):
    """All integer points of the box [lo, hi] in lexicographic order."""
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    if not axes:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


# numpy implementations

def _roots_numpy(rays, bound):
    n = rays.shape[1]
    pts = _box([-bound] * n, [bound] * n)
    pair = pts @ rays.T
    ok = ((pair == -1).sum(axis=1) == 1) & (pair >= -1).all(axis=1)
    idx = np.argmax(pair[ok] == -1, axis=1)
    return np.concatenate([pts[ok], idx[:, None].astype(np.int64)], axis=1)


def _parallelepiped_numpy(adj, det, lo, hi):
    pts = _box(lo, hi)
    lam = pts @ adj.T
    ok = ((lam >= 0) & (lam < det)).all(axis=1)
    return pts[ok]


def _reducible_numpy(cands, ineq):
    k = cands.shape[0]
    out = np.zeros(k, dtype=np.bool_)
    for i in range(k):
        diff = cands[i] - cands
        inside = (diff @ ineq.T >= 0).all(axis=1)
        nonzero = (diff != 0).any(axis=1)
        out[i] = bool((inside & nonzero).any())
    return out


def _unstable_numpy(rays, ie, e, tau_mask, bound):
    n = rays.shape[1]
    pts = _box([-bound] * n, [bound] * n)
    pair = pts @ rays.T
    shifted = (pts + e) @ rays.T
    in_cone = (pair >= 0).all(axis=1)
    tau = tau_mask.astype(np.bool_)
    outside_tau = (pair[:, tau] > 0).any(axis=1)
    lands_in_tau = (shifted[:, tau] == 0).all(axis=1) & (shifted >= 0).all(axis=1)
    bad = in_cone & outside_tau & (pair[:, ie] > 0) & lands_in_tau
    return pts[bad]


if HAVE_NUMBA:

    @njit(cache=True)
    def _roots_numba(rays, bound):
        r, n = rays.shape
        side = 2 * bound + 1
        total = side ** n
        out = np.empty((total, n + 1), dtype=np.int64)
        cnt = 0
        cur = np.full(n, -bound, dtype=np.int64)
        for _ in range(total):
            neg = -1
            ok = True
            for i in range(r):
                s = 0
                for j in range(n):
                    s += rays[i, j] * cur[j]
                if s == -1:
                    if neg >= 0:
                        ok = False
                        break
                    neg = i
                elif s < 0:
                    ok = False
                    break
            if ok and neg >= 0:
                for j in range(n):
                    out[cnt, j] = cur[j]
                out[cnt, n] = neg
                cnt += 1
            for j in range(n - 1, -1, -1):
                cur[j] += 1
                if cur[j] <= bound:
                    break
                cur[j] = -bound
        return out[:cnt]

    @njit(cache=True)
    def _parallelepiped_numba(adj, det, lo, hi):
        d = lo.shape[0]
        total = 1
        for j in range(d):
            total *= hi[j] - lo[j] + 1
        out = np.empty((total, d), dtype=np.int64)
        cnt = 0
        cur = lo.copy()
        for _ in range(total):
            ok = True
            for i in range(d):
                s = 0
                for j in range(d):
                    s += adj[i, j] * cur[j]
                if s < 0 or s >= det:
                    ok = False
                    break
            if ok:
                for j in range(d):
                    out[cnt, j] = cur[j]
                cnt += 1
            for j in range(d - 1, -1, -1):
                cur[j] += 1
                if cur[j] <= hi[j]:
                    break
                cur[j] = lo[j]
        return out[:cnt]

    @njit(cache=True)
    def _reducible_numba(cands, ineq):
        k, d = cands.shape
        r = ineq.shape[0]
        out = np.zeros(k, dtype=np.bool_)
        for i in range(k):
            for j in range(k):
                same = True
                for c in range(d):
                    if cands[i, c] != cands[j, c]:
                        same = False
                        break
                if same:
                    continue
                inside = True
                for a in range(r):
                    s = 0
                    for c in range(d):
                        s += ineq[a, c] * (cands[i, c] - cands[j, c])
                    if s < 0:
                        inside = False
                        break
                if inside:
                    out[i] = True
                    break
        return out

    @njit(cache=True)
    def _unstable_numba(rays, ie, e, tau_mask, bound):
        r, n = rays.shape
        side = 2 * bound + 1
        total = side ** n
        out = np.empty((total, n), dtype=np.int64)
        cnt = 0
        cur = np.full(n, -bound, dtype=np.int64)
        for _ in range(total):
            ok = True
            outside = False
            lands = True
            for i in range(r):
                s = 0
                t = 0
                for j in range(n):
                    s += rays[i, j] * cur[j]
                    t += rays[i, j] * (cur[j] + e[j])
                if s < 0 or t < 0:
                    ok = False
                    break
                if i == ie and s <= 0:
                    ok = False
                    break
                if tau_mask[i]:
                    if s > 0:
                        outside = True
                    if t != 0:
                        lands = False
            if ok and outside and lands:
                for j in range(n):
                    out[cnt, j] = cur[j]
                cnt += 1
            for j in range(n - 1, -1, -1):
                cur[j] += 1
                if cur[j] <= bound:
                    break
                cur[j] = -bound
        return out[:cnt]

NUMPY = {
    "roots": _roots_numpy,
    "parallelepiped": _parallelepiped_numpy,
    "reducible": _reducible_numpy,
    "unstable": _unstable_numpy,
}
NUMBA = (
    {
        "roots": _roots_numba,
        "parallelepiped": _parallelepiped_numba,
        "reducible": _reducible_numba,
        "unstable": _unstable_numba,
    }
    if HAVE_NUMBA
    else {}
)
_ACTIVE = NUMBA if USE_NUMBA else NUMPY


def _arr(x, ndim):
    a = np.array(x, dtype=np.int64)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional integer array")
    if a.size and np.abs(a).max() >= _LIMIT:
        raise OverflowError("lattice entries too large for the int64 kernels")
    return a


def root_scan(rays, bound):
    """Rows (e_1..e_n, i) for every Demazure root e in the box with distinguished ray i."""
    rays = _arr(rays, 2)
    return _ACTIVE["roots"](rays, np.int64(bound))


def parallelepiped_points(adj, det, lo, hi):
    """Integer x in the box [lo, hi] with 0 <= adj @ x < det componentwise."""
    return _ACTIVE["parallelepiped"](_arr(adj, 2), np.int64(det), _arr(lo, 1), _arr(hi, 1))


def reducible_mask(cands, ineq):
    """True where cands[i] - cands[j] is a nonzero point of {x : ineq @ x >= 0} for some j."""
    return _ACTIVE["reducible"](_arr(cands, 2), _arr(ineq, 2))


def stability_violations(rays, ie, e, tau_mask, bound):
    """Lattice m in the box with m in the cone, off the face, <rho_ie, m> > 0 and m + e on the face."""
    return _ACTIVE["unstable"](
        _arr(rays, 2), np.int64(ie), _arr(e, 1), np.asarray(tau_mask, dtype=np.bool_), np.int64(bound)
    )
