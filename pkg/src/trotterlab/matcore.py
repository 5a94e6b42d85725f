"""Dense complex linear algebra: Hermitian operators, eigensystems, unitary propagators."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import kernels
from .errors import ConvergenceFailure, DimensionMismatch, NonFinite


@dataclass(frozen=True)
class BasisTag:
    """Which basis an operator or state is written in.

    ``kind`` is one of ``"fourier_torus"`` (size = M), ``"fock"`` (size = dim)
    or ``"generic"`` (size unused).
    """

    kind: str = "generic"
    size: Optional[int] = None

    @classmethod
    def fourier_torus(cls, M):
        return cls("fourier_torus", int(M))

    @classmethod
    def fock(cls, dim):
        return cls("fock", int(dim))

    def __str__(self):
        return self.kind if self.size is None else f"{self.kind}({self.size})"


GENERIC = BasisTag()


def _frozen(a):
    a = np.array(a, dtype=np.complex128, order="C", copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense complex self-adjoint matrix.

    The matrix must equal its conjugate transpose bit for bit; use
    :meth:`from_upper` to mirror an upper triangle when building by hand.
    """

    matrix: np.ndarray
    basis_tag: BasisTag = GENERIC
    diagonal_hint: bool = False
    label: str = ""

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionMismatch(f"operator must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonFinite("operator has non-finite entries")
        if not np.array_equal(m, m.conj().T):
            raise ValueError("matrix is not exactly Hermitian; build it with HermitianOperator.from_upper")
        if self.diagonal_hint and np.count_nonzero(m - np.diag(np.diagonal(m))):
            raise ValueError("diagonal_hint set but off-diagonal entries are nonzero")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_upper(cls, a, basis_tag=GENERIC, label=""):
        """Mirror the upper triangle of ``a`` (diagonal made real)."""
        a = np.asarray(a, dtype=np.complex128)
        up = np.triu(a, 1)
        m = up + up.conj().T + np.diag(np.diagonal(a).real)
        return cls(m, basis_tag, False, label)

    @classmethod
    def diagonal(cls, d, basis_tag=GENERIC, label=""):
        d = np.asarray(d, dtype=np.float64)
        return cls(np.diag(d).astype(np.complex128), basis_tag, True, label)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @cached_property
    def eig(self) -> "EigenSystem":
        return hermitian_eig(self)

    def diag_entries(self):
        return np.diagonal(self.matrix).real.copy()

    def __add__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim} differ")
        return HermitianOperator(self.matrix + other.matrix, self.basis_tag,
                                 self.diagonal_hint and other.diagonal_hint)

    def scaled(self, c):
        """Real multiple c*H, keeping exact Hermiticity."""
        c = float(c)
        return HermitianOperator(c * self.matrix, self.basis_tag, self.diagonal_hint, self.label)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim}, basis={self.basis_tag}, diagonal={self.diagonal_hint}, label={self.label!r})"


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.size

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def function(self, f):
        """Matrix f(H) by spectral calculus."""
        V = self.eigenvectors
        return (V * f(self.eigenvalues)) @ V.conj().T

    def coefficients(self, psi):
        """Components <v_j, psi> in the eigenbasis."""
        return self.eigenvectors.conj().T @ psi


@dataclass(frozen=True, eq=False)
class UnitaryPropagator:
    matrix: np.ndarray
    generator_label: str = ""
    time: float = 0.0
    diagonal: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __matmul__(self, other):
        if isinstance(other, UnitaryPropagator):
            if other.dim != self.dim:
                raise DimensionMismatch(f"dims {self.dim} and {other.dim} differ")
            # diagonal factors turn a dense product into a row or column scaling
            if self.diagonal is not None and other.diagonal is not None:
                d = self.diagonal * other.diagonal
                return UnitaryPropagator(np.diag(d), f"{self.generator_label}*{other.generator_label}", self.time, d)
            if self.diagonal is not None:
                m = self.diagonal[:, None] * other.matrix
            elif other.diagonal is not None:
                m = self.matrix * other.diagonal[None, :]
            else:
                m = self.matrix @ other.matrix
            return UnitaryPropagator(m, f"{self.generator_label}*{other.generator_label}", self.time)
        return NotImplemented


def hermitian_eig(H: HermitianOperator) -> EigenSystem:
    """Ascending eigendecomposition. Diagonal operators skip the solver and keep ties in input order."""
    m = H.matrix
    if not np.all(np.isfinite(m)):
        raise NonFinite("operator has non-finite entries")
    if H.diagonal_hint:
        d = np.diagonal(m).real
        order = np.argsort(d, kind="stable")
        V = np.eye(H.dim, dtype=np.complex128)[:, order]
        w = d[order].copy()
    else:
        try:
            w, V = np.linalg.eigh(m)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(f"eigensolver did not converge: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise ConvergenceFailure("eigensolver returned non-finite output")
    w.setflags(write=False)
    V.setflags(write=False)
    return EigenSystem(w, V)


def unitary_exp(H: HermitianOperator, t: float, label: str | None = None) -> UnitaryPropagator:
    """U = exp(-itH) = V exp(-it Lambda) V^dagger."""
    t = float(t)
    label = H.label if label is None else label
    if H.diagonal_hint:
        d = np.exp(-1j * t * H.diag_entries())
        return UnitaryPropagator(np.diag(d), label, t, d)
    es = H.eig
    V = es.eigenvectors
    U = (V * np.exp(-1j * t * es.eigenvalues)) @ V.conj().T
    return UnitaryPropagator(U, label, t)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Coefficient vector with its basis and a human-readable label."""

    coeffs: np.ndarray
    basis_tag: BasisTag = GENERIC
    label: str = ""
    norm: float = field(init=False)

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.ndim != 1 or c.size < 1:
            raise DimensionMismatch(f"state must be a non-empty vector, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise NonFinite("state has non-finite entries")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "norm", float(np.linalg.norm(c)))

    @classmethod
    def normalized(cls, coeffs, basis_tag=GENERIC, label=""):
        c = np.asarray(coeffs, dtype=np.complex128)
        nrm = np.linalg.norm(c)
        if nrm == 0:
            raise ValueError("cannot normalise the zero vector")
        return cls(c / nrm, basis_tag, label)

    @classmethod
    def basis(cls, dim, k, basis_tag=GENERIC, label=""):
        c = np.zeros(dim, dtype=np.complex128)
        c[k] = 1.0
        return cls(c, basis_tag, label or f"e_{k}")

    @property
    def dim(self):
        return self.coeffs.size

    def __repr__(self):
        return f"StateVector(dim={self.dim}, norm={self.norm:.6g}, label={self.label!r})"


def _raw(psi):
    return psi.coeffs if isinstance(psi, StateVector) else np.asarray(psi, dtype=np.complex128)


def apply_power(U: UnitaryPropagator, psi, n: int):
    """U^n psi by n successive matrix-vector products (U^n is never formed).

    ``psi`` may be a StateVector, a vector, or a (dim, m) block of column states;
    the return type follows the input.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    x = _raw(psi)
    if x.shape[0] != U.dim:
        raise DimensionMismatch(f"propagator dim {U.dim} vs state dim {x.shape[0]}")
    if U.diagonal is not None:
        d = U.diagonal if x.ndim == 1 else U.diagonal[:, None]
        y = x.copy()
        for _ in range(n):
            y = d * y
    else:
        block = x if x.ndim == 2 else x[:, None]
        y = kernels.power_apply(U.matrix, block, n)
        y = y if x.ndim == 2 else y[:, 0]
    if not np.all(np.isfinite(y)):
        raise NonFinite("non-finite entries after repeated application")
    if isinstance(psi, StateVector):
        return StateVector(y, psi.basis_tag, psi.label)
    return y
