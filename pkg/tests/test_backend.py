import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phfcox import _backend, _fallback

kernels = pytest.importorskip("phfcox._kernels")


def test_compiled_backend_selected():
    assert _backend.BACKEND == "cython"


def test_env_var_forces_fallback():
    out = subprocess.run([sys.executable, "-c", "import phfcox; print(phfcox.BACKEND)"],
                         env={**os.environ, "PHFCOX_PURE_PYTHON": "1"},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8), st.floats(0.0, 2.0))
def test_cd_quadratic_compiled_matches_fallback(seed, p, lam):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(p + 3, p))
    H = A.T @ A / (p + 3) + 1e-3 * np.eye(p)
    g = rng.normal(size=p)
    gamma = rng.normal(size=p) * (rng.uniform(size=p) < 0.5)
    pen = (rng.uniform(size=p) < 0.7).astype(np.uint8)
    a = kernels.cd_quadratic(g, H, gamma, pen, lam)
    b = _fallback.cd_quadratic(g, H, gamma, pen, lam)
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-10)


def test_cd_quadratic_solves_unpenalized_system():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(8, 4))
    H = A.T @ A
    g = rng.normal(size=4)
    d = kernels.cd_quadratic(g, H, np.zeros(4), np.zeros(4, np.uint8), 0.5)
    np.testing.assert_allclose(d, np.linalg.solve(H, -g), atol=1e-9)


def test_cd_quadratic_soft_threshold_one_dimension():
    # minimize g d + h d^2 / 2 + lam |d|: zero when |g| <= lam
    for g, h, lam, want in ((0.3, 2.0, 0.5, 0.0), (-1.5, 2.0, 0.5, 0.5), (1.5, 1.0, 0.5, -1.0)):
        d = kernels.cd_quadratic(np.array([g]), np.array([[h]]), np.zeros(1), np.ones(1, np.uint8), lam)
        assert d[0] == pytest.approx(want, abs=1e-12)
