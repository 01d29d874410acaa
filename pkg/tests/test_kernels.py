import os
import subprocess
import sys

import numpy as np
import pytest

from potlab import kernels
from potlab.algebraic_core import BivariatePolynomial, circle_path, solve_fiber

BACKENDS = kernels.backends()
P = BivariatePolynomial.parse("z*y^3 + z*y - 1")


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_aberth_matches_numpy(name):
    K = BACKENDS[name]
    a = np.array([1.0, -2.0, 0.5, 3.0, 1.0, 1.0], dtype=complex)
    r, ok = K.aberth(a, None, 200)
    assert ok
    ref = np.polynomial.polynomial.polyroots(a)
    d = np.abs(np.asarray(r)[:, None] - ref[None, :])
    assert d.min(axis=1).max() < 1e-10 and d.min(axis=0).max() < 1e-10


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_backends_agree():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    path = circle_path(0.0, 3.0, 64)
    r0 = solve_fiber(P, path[0])
    a = py.track(P.C, path, r0, True, 0.125, 60, 1e-10, 1e-12)
    b = cy.track(P.C, path, r0, True, 0.125, 60, 1e-10, 1e-12)
    np.testing.assert_allclose(a[1][-1], b[1][-1], atol=1e-12)
    np.testing.assert_allclose(a[2][-1], b[2][-1], atol=1e-10)
    rng = np.random.default_rng(0)
    V = rng.standard_normal((40, 50))
    np.testing.assert_allclose(py.circle_deficits(V, [1.0, 2.0], 32),
                               cy.circle_deficits(V, [1.0, 2.0], 32), atol=1e-12, equal_nan=True)
    A = rng.standard_normal((30, 5)) + 1j * rng.standard_normal((30, 5))
    ra, _ = py.aberth_batch(A)
    rb, _ = cy.aberth_batch(A)
    for x, y in zip(ra, rb):
        assert np.abs(x[:, None] - y[None, :]).min(axis=1).max() < 1e-9


def test_pure_python_fallback():
    code = ("import potlab, numpy as np;"
            "from potlab import *;"
            "assert potlab.BACKEND == 'python';"
            "P = BivariatePolynomial.parse('y^2 - z');"
            "print(format_permutation(monodromy(P, 1, circle_path(0, 1))))")
    env = dict(os.environ, POTLAB_PURE_PYTHON="1")
    p = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert p.returncode == 0, p.stderr
    assert p.stdout.strip() == "(1 2)"
