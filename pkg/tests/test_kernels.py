import os
import subprocess
import sys

import numpy as np
import pytest

from trotterlab import kernels
from trotterlab._accel import HAVE_NUMBA, backend

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def _unitary(rng, dim):
    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, _ = np.linalg.qr(X)
    return Q


@needs_numba
def test_power_apply_flavours_agree(rng):
    U = _unitary(rng, 7)
    X = rng.standard_normal((7, 3)) + 1j * rng.standard_normal((7, 3))
    a = kernels.power_apply_numpy(U, X, 50)
    b = kernels.power_apply_numba(U, X, 50)
    assert np.max(np.abs(a - b)) <= 1e-12


@needs_numba
def test_increment_norms_flavours_agree(rng):
    lam = rng.uniform(-50, 50, 41)
    w = rng.uniform(0, 1, 41)
    ts = np.geomspace(1e-4, 1, 30)
    a = kernels.increment_norms_numpy(lam, w, ts)
    b = kernels.increment_norms_numba(lam, w, ts)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


@needs_numba
def test_energy_samples_flavours_agree(rng):
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    AA = A.conj().T @ A
    G = np.diag([0.0, 1.0, 2.0, 3.0]).astype(complex)
    Z = rng.standard_normal((100, 4)) + 1j * rng.standard_normal((100, 4))
    a = kernels.energy_samples_numpy(AA, G, Z, 0.7)
    b = kernels.energy_samples_numba(AA, G, Z, 0.7)
    assert np.allclose(a, b, rtol=1e-12)


def test_increment_norms_closed_form():
    # one eigenvalue: ||(e^{-it lam} - 1) e|| = 2|sin(t lam / 2)|
    out = kernels.increment_norms(np.array([3.0]), np.array([1.0]), np.array([0.1, 1.0]))
    assert np.allclose(out, 2 * np.abs(np.sin(np.array([0.15, 1.5]))), rtol=1e-14)


def test_energy_samples_feasible_scaling():
    G = np.diag([0.0, 4.0]).astype(complex)
    AA = np.eye(2, dtype=complex)
    Z = np.array([[0, 1], [1, 0]], dtype=complex)
    # e_1 has energy 4 > E = 1, gets scaled by 1/4; e_0 keeps unit norm
    assert np.allclose(kernels.energy_samples(AA, G, Z, 1.0), [0.25, 1.0])


def test_env_flag_selects_numpy():
    env = dict(os.environ, TROTTERLAB_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from trotterlab._accel import backend; print(backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_backend_name():
    assert backend() in ("numba", "numpy")
