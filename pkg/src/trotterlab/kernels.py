"""Hot loops, each in a numba and a numpy flavour.

The public names at the bottom pick the numba version when numba is
available and not disabled (see ``_accel``). Both flavours are always
importable so they can be benchmarked against each other.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit


# ---------------------------------------------------------------- numpy

def power_apply_numpy(U, X, n):
    """Apply U to the columns of X, n times, one product at a time."""
    Y = X.copy()
    for _ in range(n):
        Y = U @ Y
    return Y


def increment_norms_numpy(lam, w, ts, chunk=1 << 22):
    """sqrt(sum_j w_j * 4 sin^2(t lam_j / 2)) for every t in ts."""
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    out = np.empty(ts.size)
    step = max(1, chunk // max(lam.size, 1))
    for i in range(0, ts.size, step):
        s = np.sin(0.5 * np.outer(ts[i:i + step], lam))
        out[i:i + step] = np.sqrt(4.0 * (s * s) @ w)
    return out


def energy_samples_numpy(AA, G, Z, E):
    """Value ||A psi||^2 of each sample row after rescaling into the feasible set.

    Each row z is normalised, then shrunk by min(1, sqrt(E / <z,Gz>)) so that
    ||psi|| <= 1 and <psi,G psi> <= E hold.
    """
    nz = np.einsum("ij,ij->i", Z.conj(), Z).real
    g = np.einsum("ij,jk,ik->i", Z.conj(), G, Z).real / nz
    a = np.einsum("ij,jk,ik->i", Z.conj(), AA, Z).real / nz
    scale = np.ones_like(g)
    hot = g > E
    scale[hot] = E / g[hot]
    return a * scale


# ---------------------------------------------------------------- numba

@njit(cache=True, nogil=True)
def power_apply_numba(U, X, n):
    Y = X.copy()
    for _ in range(n):
        Y = np.dot(U, Y)
    return Y


@njit(cache=True, nogil=True)
def increment_norms_numba(lam, w, ts):
    out = np.empty(ts.size)
    for i in range(ts.size):
        acc = 0.0
        half = 0.5 * ts[i]
        for j in range(lam.size):
            s = np.sin(half * lam[j])
            acc += w[j] * s * s
        out[i] = np.sqrt(4.0 * acc)
    return out


@njit(cache=True, nogil=True)
def energy_samples_numba(AA, G, Z, E):
    m, d = Z.shape
    out = np.empty(m)
    for r in range(m):
        nz = 0.0
        for i in range(d):
            nz += Z[r, i].real ** 2 + Z[r, i].imag ** 2
        g = 0.0
        a = 0.0
        for i in range(d):
            zi = Z[r, i].conjugate()
            gi = 0j
            ai = 0j
            for k in range(d):
                gi += G[i, k] * Z[r, k]
                ai += AA[i, k] * Z[r, k]
            g += (zi * gi).real
            a += (zi * ai).real
        g /= nz
        a /= nz
        out[r] = a * (E / g) if g > E else a
    return out


# ---------------------------------------------------------------- dispatch

if HAVE_NUMBA:
    def power_apply(U, X, n):
        return power_apply_numba(np.ascontiguousarray(U, dtype=np.complex128),
                                 np.ascontiguousarray(X, dtype=np.complex128), int(n))

    def increment_norms(lam, w, ts):
        return increment_norms_numba(np.ascontiguousarray(lam, dtype=np.float64),
                                     np.ascontiguousarray(w, dtype=np.float64),
                                     np.ascontiguousarray(ts, dtype=np.float64))

    def energy_samples(AA, G, Z, E):
        return energy_samples_numba(np.ascontiguousarray(AA, dtype=np.complex128),
                                    np.ascontiguousarray(G, dtype=np.complex128),
                                    np.ascontiguousarray(Z, dtype=np.complex128), float(E))
else:
    power_apply = power_apply_numpy
    increment_norms = increment_norms_numpy
    energy_samples = energy_samples_numpy
