import os
import subprocess
import sys

import numpy as np
import pytest

from mixphase import _kernels_py, numkernel as nk
from mixphase.states import haar_unitary, random_hermitian

compiled = pytest.importorskip("mixphase._kernels", reason="compiled extension not built")


def _steps(rng, J=40, n=3):
    return np.array([nk.step_unitary(random_hermitian(n, rng), 0.05) for _ in range(J)])


def test_cumulative_products_parity(rng):
    S = _steps(rng)
    start = haar_unitary(3, rng)
    a = compiled.cumulative_products(S, start)
    b = _kernels_py.cumulative_products(S, start)
    np.testing.assert_allclose(a, b, atol=1e-13)
    # oracle: explicit left multiplication
    U = start.copy()
    for j, s in enumerate(S):
        U = s @ U
        np.testing.assert_allclose(a[j + 1], U, atol=1e-13)


def test_node_expectations_parity(rng):
    S = _steps(rng)
    U = _kernels_py.cumulative_products(S, np.eye(3, dtype=complex))
    H = np.array([random_hermitian(3, rng) for _ in range(len(S))])
    V = haar_unitary(3, rng)[:, :2].copy()
    a = compiled.node_expectations(U, H, V)
    b = _kernels_py.node_expectations(U, H, V)
    np.testing.assert_allclose(a, b, atol=1e-13)
    direct = [[np.vdot(U[j] @ V[:, l], H[j] @ U[j] @ V[:, l]).real for l in range(2)]
              for j in range(len(S))]
    np.testing.assert_allclose(a, direct, atol=1e-13)


def test_evolve_vector_parity(rng):
    S = _steps(rng)
    psi = haar_unitary(3, rng)[:, 0].copy()
    np.testing.assert_allclose(compiled.evolve_vector(S, psi),
                               _kernels_py.evolve_vector(S, psi), atol=1e-13)


def test_fallback_selected_by_environment():
    code = ("import mixphase, numpy as np;"
            "from mixphase import models;"
            "p = models.precession_path();"
            "print(mixphase.BACKEND, repr(float(mixphase.mixed_geometric_phase("
            "models.cone_state(0.5, 2/3), p).phase)))")
    env = dict(os.environ, MIXPHASE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert out[0] == "python"
    env.pop("MIXPHASE_PURE_PYTHON")
    ref = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert ref[0] == "cython"
    assert abs(float(out[1]) - float(ref[1])) < 1e-12
