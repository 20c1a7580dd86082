"""Both kernel backends must agree bit-for-bit on every sweep."""

import os
import subprocess
import sys

import numpy as np
import pytest

from hamext import kernels


def rng():
    return np.random.Generator(np.random.Philox(key=1234))


def test_backend_is_numba_here():
    # the suite runs with numba available; the numpy lane is exercised
    # through the *_np functions below and the subprocess test
    assert kernels.BACKEND in ("numba", "numpy")


def test_popcount_matches_python():
    vals = rng().integers(0, 1 << 63, size=500, dtype=np.uint64)
    expect = [int(v).bit_count() for v in vals]
    assert kernels.popcount_np(vals).tolist() == expect
    assert kernels.popcount_nb(vals).tolist() == expect


def test_dilate_backends_agree():
    g = rng()
    for n in (1, 3, 6, 10):
        ind = g.random(1 << n) < 0.3
        a = kernels.dilate_np(ind.copy(), n)
        b = kernels.dilate_nb(ind.copy(), n)
        assert np.array_equal(a, b)


def test_dilate_grows_singleton_to_ball():
    n = 5
    ind = np.zeros(1 << n, dtype=np.bool_)
    ind[0] = True
    sizes = [1]
    for _ in range(n):
        ind = kernels.dilate(ind, n)
        sizes.append(int(ind.sum()))
    assert sizes == [1, 6, 16, 26, 31, 32]


def _ball_masks(n, d):
    balls = []
    for v in range(1 << n):
        m = 0
        for w in range(1 << n):
            if bin(v ^ w).count("1") <= d:
                m |= 1 << w
        balls.append(m)
    return np.array(balls, dtype=np.uint64)


def test_subset_min_gamma_backends_agree():
    for n, d in ((2, 1), (3, 1), (3, 2), (4, 1), (4, 3)):
        ball = _ball_masks(n, d)
        assert np.array_equal(kernels.subset_min_gamma_np(ball),
                              kernels.subset_min_gamma_nb(ball))


def test_all_outputs_backends_agree():
    cores = np.array([0b111, 0b11111000, 0b1111100000000], dtype=np.uint64)
    sizes = np.array([3, 5, 5], dtype=np.int64)
    a = kernels.all_outputs_np(cores, sizes, 13)
    b = kernels.all_outputs_nb(cores, sizes, 13)
    assert np.array_equal(a, b)


def test_robustness_backends_agree():
    cores = np.array([0b111, 0b11111000], dtype=np.uint64)
    sizes = np.array([3, 5], dtype=np.int64)
    budgets2 = np.array([2, 2], dtype=np.int64)
    patterns = rng().integers(0, 1 << 8, size=32, dtype=np.uint64)
    a = kernels.robustness_violations_np(cores, sizes, budgets2, patterns, 8)
    b = kernels.robustness_violations_nb(cores, sizes, budgets2, patterns, 8)
    assert a == b


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, HAMEXT_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c",
         "from hamext import kernels; print(kernels.BACKEND, "
         "kernels.dilate is kernels.dilate_np)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.split() == ["numpy", "True"]


def test_env_flag_rejects_unknown():
    env = dict(os.environ, HAMEXT_BACKEND="cuda")
    out = subprocess.run([sys.executable, "-c", "import hamext.kernels"],
                         capture_output=True, text=True, env=env)
    assert out.returncode != 0
    assert "HAMEXT_BACKEND" in out.stderr
