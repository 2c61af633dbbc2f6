import os
import subprocess
import sys

import numpy as np
import pytest

from polybound import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba missing")


def brute_scan(A, rhs, lo, hi):
    grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    keep = np.all(pts @ np.array(A).T <= np.array(rhs), axis=1)
    return pts[keep]


@pytest.mark.parametrize("impl", ["numpy", pytest.param("numba", marks=needs_numba)])
def test_scan_matches_brute_force(impl):
    rng = np.random.default_rng(3)
    for _ in range(10):
        d = int(rng.integers(1, 4))
        A = rng.integers(-5, 6, size=(d + 2, d))
        rhs = rng.integers(0, 30, size=d + 2)
        lo = rng.integers(-6, 0, size=d)
        hi = lo + rng.integers(0, 9, size=d)
        got = _kernels.scan_box(A, rhs, lo, hi, impl)
        assert np.array_equal(got, brute_scan(A, rhs, lo, hi))


@pytest.mark.parametrize("impl", ["numpy", pytest.param("numba", marks=needs_numba)])
def test_eval_matches_python(impl):
    rng = np.random.default_rng(4)
    pts = rng.integers(-50, 50, size=(200, 3))
    exps = rng.integers(0, 4, size=(6, 3))
    coefs = rng.integers(-100, 100, size=6)
    mpow = rng.integers(1, 20, size=6)
    got = _kernels.eval_grid(pts, exps, coefs, mpow, impl)
    want = [sum(int(c) * int(m) * int(np.prod([int(x) ** int(e) for x, e in zip(p, ex)])) for c, m, ex in zip(coefs, mpow, exps)) for p in pts]
    assert got.tolist() == want


def test_empty_box():
    out = _kernels.scan_box([[1]], [5], [3], [2], "numpy")
    assert out.shape == (0, 1)


def test_unknown_impl():
    with pytest.raises(ValueError):
        _kernels.scan_box([[1]], [5], [0], [2], "fortran")


def test_env_flag_forces_numpy():
    code = "from polybound import _kernels; print(_kernels.default_impl())"
    env = dict(os.environ, POLYBOUND_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@needs_numba
def test_default_is_numba(monkeypatch):
    monkeypatch.delenv("POLYBOUND_NO_NUMBA", raising=False)
    assert _kernels.default_impl() == "numba"
    monkeypatch.setenv("POLYBOUND_NO_NUMBA", "yes")
    assert _kernels.default_impl() == "numpy"
