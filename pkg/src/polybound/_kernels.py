"""Integer hot loops: scaled-lattice scanning and grid evaluation.

Each kernel has a numba ``@njit`` implementation and a pure-numpy one.
Both work on int64 data only, so they are exact; callers check overflow
bounds first and use the object-dtype path when int64 could overflow.

Set ``POLYBOUND_NO_NUMBA=1`` to force the numpy path.  ``POLYBOUND_THREADS``
caps numba's thread pool.
"""

from __future__ import annotations

import os

import numpy as np

INT64_SAFE = 2**62

try:  # pragma: no cover - import guard
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip the TBB probe, which warns on older TBB builds
        numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


def default_impl() -> str:
    if HAVE_NUMBA and not _env_flag("POLYBOUND_NO_NUMBA"):
        return "numba"
    return "numpy"


def _configure_threads() -> None:
    cap = os.environ.get("POLYBOUND_THREADS")
    if HAVE_NUMBA and cap:
        try:
            numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
        except ValueError:
            pass


if HAVE_NUMBA:

    @njit(cache=True)
    def _scan_numba(A, rhs, lo, hi):  # pragma: no cover - compiled
        n, d = A.shape
        total = 1
        for j in range(d):
            total *= hi[j] - lo[j] + 1
        out = np.empty((total, d), dtype=np.int64)
        p = lo.copy()
        count = 0
        for _ in range(total):
            ok = True
            for i in range(n):
                s = 0
                for j in range(d):
                    s += A[i, j] * p[j]
                if s > rhs[i]:
                    ok = False
                    break
            if ok:
                for j in range(d):
                    out[count, j] = p[j]
                count += 1
            # odometer, last coordinate fastest
            j = d - 1
            while j >= 0:
                p[j] += 1
                if p[j] <= hi[j]:
                    break
                p[j] = lo[j]
                j -= 1
        return out[:count]

    @njit(parallel=True, cache=True)
    def _eval_numba(points, exps, coefs, mpow):  # pragma: no cover - compiled
        npts, d = points.shape
        nterms = exps.shape[0]
        out = np.zeros(npts, dtype=np.int64)
        for k in prange(npts):
            acc = 0
            for t in range(nterms):
                v = coefs[t] * mpow[t]
                for j in range(d):
                    e = exps[t, j]
                    x = points[k, j]
                    for _ in range(e):
                        v *= x
                acc += v
            out[k] = acc
        return out


def _scan_numpy(A, rhs, lo, hi):
    d = A.shape[1]
    axes = [np.arange(lo[j], hi[j] + 1, dtype=np.int64) for j in range(d)]
    if d == 1:
        pts = axes[0][:, None]
        mask = np.all(pts @ A.T <= rhs, axis=1)
        return pts[mask]
    chunks = []
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, d - 1)
    partial = rest @ A[:, 1:].T
    for x0 in axes[0]:
        mask = np.all(partial + x0 * A[:, 0] <= rhs, axis=1)
        if mask.any():
            sel = rest[mask]
            chunks.append(np.column_stack([np.full(len(sel), x0, dtype=np.int64), sel]))
    if not chunks:
        return np.empty((0, d), dtype=np.int64)
    return np.concatenate(chunks)


def _eval_numpy(points, exps, coefs, mpow):
    out = np.zeros(len(points), dtype=np.int64)
    for t in range(len(exps)):
        term = np.full(len(points), coefs[t] * mpow[t], dtype=np.int64)
        for j, e in enumerate(exps[t]):
            if e:
                term *= points[:, j] ** int(e)
        out += term
    return out


def _resolve(impl):
    impl = impl or default_impl()
    if impl == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return impl


def scan_box(A, rhs, lo, hi, impl: str | None = None) -> np.ndarray:
    """Integer points ``p`` with ``lo <= p <= hi`` and ``A p <= rhs``.

    Rows come back in lexicographic order.  Inputs must be int64-safe.
    """
    A = np.ascontiguousarray(A, dtype=np.int64)
    rhs = np.ascontiguousarray(rhs, dtype=np.int64)
    lo = np.ascontiguousarray(lo, dtype=np.int64)
    hi = np.ascontiguousarray(hi, dtype=np.int64)
    if np.any(hi < lo):
        return np.empty((0, A.shape[1]), dtype=np.int64)
    impl = _resolve(impl)
    if impl == "numba":
        _configure_threads()
        return _scan_numba(A, rhs, lo, hi)
    if impl == "numpy":
        return _scan_numpy(A, rhs, lo, hi)
    raise ValueError(f"unknown kernel implementation {impl!r}")


def eval_grid(points, exps, coefs, mpow, impl: str | None = None) -> np.ndarray:
    """``sum_t coefs[t] * mpow[t] * prod_j points[:, j] ** exps[t, j]`` in int64."""
    points = np.ascontiguousarray(points, dtype=np.int64)
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coefs = np.ascontiguousarray(coefs, dtype=np.int64)
    mpow = np.ascontiguousarray(mpow, dtype=np.int64)
    impl = _resolve(impl)
    if impl == "numba":
        _configure_threads()
        return _eval_numba(points, exps, coefs, mpow)
    if impl == "numpy":
        return _eval_numpy(points, exps, coefs, mpow)
    raise ValueError(f"unknown kernel implementation {impl!r}")
