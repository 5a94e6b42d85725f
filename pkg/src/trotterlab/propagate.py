"""Exact and Trotterised evolution, Trotter errors and the key-commutator diagnostic."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .matcore import StateVector, UnitaryPropagator, apply_power, unitary_exp
from .models import SplitModel

__all__ = [
    "StateVector", "TrotterRun", "B_THEN_A", "A_THEN_B", "exact_evolve", "cycle_propagator",
    "trotter_error", "trotter_errors", "commutator_defect", "telescoping_bound",
]

# B_then_A: e^{-ihH_B} acts first, U_cyc = e^{-ihH_A} e^{-ihH_B}
B_THEN_A = "B_then_A"
A_THEN_B = "A_then_B"
ORDERS = (B_THEN_A, A_THEN_B)


def _check_order(order):
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")


def _vec(model, psi):
    x = psi.coeffs if isinstance(psi, StateVector) else np.asarray(psi, dtype=np.complex128)
    if x.shape[0] != model.dim:
        raise DimensionMismatch(f"model dim {model.dim} vs state dim {x.shape[0]}")
    return x


def _exact(model, x, t):
    es = model.total.eig
    V = es.eigenvectors
    ph = np.exp(-1j * t * es.eigenvalues)
    c = V.conj().T @ x
    return V @ (ph * c if x.ndim == 1 else ph[:, None] * c)


def exact_evolve(model: SplitModel, psi, t: float):
    """e^{-it(H_A+H_B)} psi, via the cached eigensystem of the total."""
    x = _vec(model, psi)
    y = _exact(model, x, float(t))
    if isinstance(psi, StateVector):
        return StateVector(y, psi.basis_tag, psi.label)
    return y


def cycle_propagator(model: SplitModel, h: float, order: str = B_THEN_A) -> UnitaryPropagator:
    """One Trotter step of length h (the rightmost factor acts first)."""
    _check_order(order)
    UA = unitary_exp(model.H_A, h, model.label_A)
    UB = unitary_exp(model.H_B, h, model.label_B)
    return UA @ UB if order == B_THEN_A else UB @ UA


def trotter_error(model: SplitModel, psi, t: float, n: int, order: str = B_THEN_A) -> float:
    """||U_cyc(t/n)^n psi - e^{-itH} psi||."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    x = _vec(model, psi)
    if t == 0:
        return 0.0
    U = cycle_propagator(model, t / n, order)
    y = apply_power(U, x, n)
    return float(np.linalg.norm(y - _exact(model, x, float(t))))


def trotter_errors(model: SplitModel, states, t: float, n_list, order: str = B_THEN_A, jobs: int = 1):
    """Errors for a block of states (columns) and several n; returns shape (len(n_list), m).

    Each n is an independent job with its own cycle propagator; the
    eigensystems of H_A, H_B and the total are shared read-only.
    """
    X = np.asarray(states.coeffs if isinstance(states, StateVector) else states, dtype=np.complex128)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != model.dim:
        raise DimensionMismatch(f"model dim {model.dim} vs state dim {X.shape[0]}")
    t = float(t)
    ref = _exact(model, X, t)
    # warm the caches before any threads start
    model.H_A.eig, model.H_B.eig

    def one(n):
        if t == 0:
            return np.zeros(X.shape[1])
        Y = apply_power(cycle_propagator(model, t / n, order), X, int(n))
        return np.linalg.norm(Y - ref, axis=0)

    n_list = [int(n) for n in n_list]
    if jobs and jobs > 1 and len(n_list) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(one, n_list))
    else:
        rows = [one(n) for n in n_list]
    return np.array(rows)


@dataclass(frozen=True, eq=False)
class TrotterRun:
    model: SplitModel
    t: float
    n: int
    order: str
    error: float

    @classmethod
    def measure(cls, model, psi, t, n, order=B_THEN_A):
        return cls(model, float(t), int(n), order, trotter_error(model, psi, t, n, order))


def commutator_defect(model: SplitModel, psi, t: float, n: int, grid_points: int = 64,
                      order: str = B_THEN_A) -> float:
    """Grid maximum of ||[X, e^{-isY/n}] e^{-i tau H} psi|| over (s, tau) in [0,t]^2.

    Y is the generator acting first in a cycle and X the one acting second, so
    for B_then_A this is [H_A, e^{-isH_B/n}] and for A_then_B it is
    [H_B, e^{-isH_A/n}]. The grid value is a lower estimate of the supremum.
    """
    _check_order(order)
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    x = _vec(model, psi)
    t = float(t)
    if t == 0:
        return 0.0
    first, second = (model.H_B, model.H_A) if order == B_THEN_A else (model.H_A, model.H_B)
    grid = np.linspace(0.0, t, grid_points)
    # evolved states as columns, then everything in the eigenbasis of the first generator
    es = model.total.eig
    Vh = es.eigenvectors
    c = Vh.conj().T @ x
    Phi = Vh @ (np.exp(-1j * np.outer(es.eigenvalues, grid)) * c[:, None])
    ey = first.eig
    W = ey.eigenvectors
    Xt = W.conj().T @ second.matrix @ W
    Pt = W.conj().T @ Phi
    XP = Xt @ Pt
    best = 0.0
    for s in grid:
        D = np.exp(-1j * (s / n) * ey.eigenvalues)[:, None]
        R = Xt @ (D * Pt) - D * XP
        best = max(best, float(np.max(np.linalg.norm(R, axis=0))))
    return best


def telescoping_bound(model: SplitModel, t: float, n: int, order: str = B_THEN_A) -> float:
    """n * ||U_cyc(t/n) - e^{-itH/n}||_op, largest singular value of the difference."""
    n = int(n)
    h = float(t) / n
    U = cycle_propagator(model, h, order).matrix
    T = unitary_exp(model.total, h).matrix
    return n * float(np.linalg.norm(U - T, 2))
