"""Finite model operators: torus Laplacian with Fourier potentials, and Fock-basis oscillator."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import AsymmetricCoefficients, DimensionMismatch, InvalidAlpha
from .matcore import BasisTag, HermitianOperator


@dataclass(frozen=True)
class FourierCoefficients:
    """Coefficients c_n of V = sum_n c_n J^n on the basis n = -M..M.

    ``coeffs`` maps nonzero offsets (1 <= |n| <= 2M) to complex values. A
    missing mirror offset is implied by Hermitian symmetry.
    """

    M: int
    coeffs: Dict[int, complex] = field(default_factory=dict)
    c0: Optional[float] = None

    def __getitem__(self, n):
        if n == 0:
            return 0.0 if self.c0 is None else self.c0
        if n in self.coeffs:
            return self.coeffs[n]
        if -n in self.coeffs:
            return np.conj(self.coeffs[-n])
        return 0.0

    def check(self):
        if self.c0 is not None and np.imag(self.c0) != 0:
            raise AsymmetricCoefficients("c_0 must be real")
        for n, c in self.coeffs.items():
            if n == 0 or abs(n) > 2 * self.M:
                raise ValueError(f"offset {n} outside 1 <= |n| <= 2M = {2 * self.M}")
            if -n in self.coeffs and self.coeffs[-n] != np.conj(c):
                raise AsymmetricCoefficients(f"c_{-n} = {self.coeffs[-n]} is not conj(c_{n}) = {np.conj(c)}")

    def l1(self):
        """sum over all offsets of |c_n| (both signs counted)."""
        total = abs(self[0])
        for n in range(1, 2 * self.M + 1):
            total += abs(self[n]) + abs(self[-n])
        return total


def torus_laplacian(M: int) -> HermitianOperator:
    """-Delta = diag(4 pi^2 n^2), n = -M..M, on the Fourier basis of R/Z."""
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    n = np.arange(-M, M + 1)
    return HermitianOperator.diagonal(4 * np.pi ** 2 * n.astype(float) ** 2,
                                      BasisTag.fourier_torus(M), "-Delta")


def fourier_potential(c: FourierCoefficients, label="V") -> HermitianOperator:
    """Toeplitz matrix with c_n on offset n (offset +n sends e_k to e_{k+n})."""
    c.check()
    M = c.M
    d = 2 * M + 1
    V = np.zeros((d, d), dtype=np.complex128)
    if c.c0:
        V[np.arange(d), np.arange(d)] = float(np.real(c.c0))
    for n in range(1, 2 * M + 1):
        cn = complex(c[n])
        if cn == 0:
            continue
        idx = np.arange(d - n)
        V[idx + n, idx] = cn
        V[idx, idx + n] = np.conj(cn)
    return HermitianOperator(V, BasisTag.fourier_torus(M), False, label)


def _odd_series(M, amp):
    coeffs = {}
    for n in range(1, 2 * M + 1, 2):
        cn = complex(amp(n))
        coeffs[n] = cn
        coeffs[-n] = np.conj(cn)
    return FourierCoefficients(M, coeffs)


def square_wave_coeffs(M: int) -> FourierCoefficients:
    """c_n = -2i/(pi n) on odd n, zero on even n."""
    return _odd_series(M, lambda n: -2j / (np.pi * n))


def v_alpha_coeffs(M: int, alpha: float) -> FourierCoefficients:
    """c_n = -2i/(pi n^alpha) on odd n; square integrable only for alpha > 1/2."""
    if not alpha > 0.5:
        raise InvalidAlpha(f"alpha must exceed 1/2, got {alpha}")
    if alpha == 1:
        return square_wave_coeffs(M)
    return _odd_series(M, lambda n: -2j / (np.pi * n ** alpha))


def sine_coeffs(M: int) -> FourierCoefficients:
    """V = sin(2 pi x): c_1 = -i/2."""
    return FourierCoefficients(M, {1: -0.5j, -1: 0.5j})


def fourier_decay_state(M: int, s: float) -> np.ndarray:
    """Unit vector with c_n proportional to |n|^{-s} for n != 0 and c_0 = 0."""
    n = np.arange(-M, M + 1).astype(float)
    c = np.zeros(2 * M + 1)
    nz = n != 0
    c[nz] = np.abs(n[nz]) ** (-float(s))
    return (c / np.linalg.norm(c)).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class FockOperators:
    a: np.ndarray
    Q: HermitianOperator
    P: HermitianOperator
    N: HermitianOperator
    P2: HermitianOperator
    Q2: HermitianOperator


def fock_operators(dim: int) -> FockOperators:
    """Ladder, position, momentum and N = P^2 + Q^2 in a truncated Fock basis.

    N is formed from the truncated matrices, so its last diagonal entry is
    dim - 1 instead of 2 dim - 1.
    """
    if int(dim) != dim or dim < 2:
        raise ValueError("dim must be an integer >= 2")
    tag = BasisTag.fock(dim)
    k = np.arange(1, dim)
    a = np.zeros((dim, dim), dtype=np.complex128)
    a[k - 1, k] = np.sqrt(k)
    ad = a.conj().T
    Q = HermitianOperator((a + ad) / np.sqrt(2), tag, False, "Q")
    P = HermitianOperator(-1j * (a - ad) / np.sqrt(2), tag, False, "P")
    P2 = HermitianOperator.from_upper(P.matrix @ P.matrix, tag, "P^2")
    Q2 = HermitianOperator.from_upper(Q.matrix @ Q.matrix, tag, "Q^2")
    N = HermitianOperator.from_upper(P2.matrix + Q2.matrix, tag, "N")
    return FockOperators(a, Q, P, N, P2, Q2)


@dataclass(frozen=True, eq=False)
class SplitModel:
    """H = H_A + H_B; ``order`` in propagate decides which factor acts first."""

    H_A: HermitianOperator
    H_B: HermitianOperator
    label_A: str = "A"
    label_B: str = "B"
    total: HermitianOperator = field(init=False)

    def __post_init__(self):
        if self.H_A.dim != self.H_B.dim:
            raise DimensionMismatch(f"H_A dim {self.H_A.dim} vs H_B dim {self.H_B.dim}")
        if self.H_A.basis_tag != self.H_B.basis_tag:
            raise DimensionMismatch(f"basis tags differ: {self.H_A.basis_tag} vs {self.H_B.basis_tag}")
        object.__setattr__(self, "total", self.H_A + self.H_B)

    @property
    def dim(self):
        return self.H_A.dim

    @property
    def basis_tag(self):
        return self.H_A.basis_tag

    def commutes(self, tol=1e-12):
        A, B = self.H_A.matrix, self.H_B.matrix
        return float(np.max(np.abs(A @ B - B @ A))) <= tol


def torus_model(potential: str, M: int, alpha: float | None = None, scale: float = 1.0) -> SplitModel:
    """H_A = -Delta, H_B = scale * V for V in {square_wave, sine, v_alpha}."""
    if potential == "square_wave":
        c = square_wave_coeffs(M)
    elif potential == "sine":
        c = sine_coeffs(M)
    elif potential == "v_alpha":
        if alpha is None:
            raise InvalidAlpha("v_alpha potential needs alpha")
        c = v_alpha_coeffs(M, alpha)
    else:
        raise ValueError(f"unknown potential {potential!r}")
    V = fourier_potential(c, potential)
    if scale != 1.0:
        V = V.scaled(scale)
    return SplitModel(torus_laplacian(M), V, "-Delta", potential)


def oscillator_model(dim: int) -> SplitModel:
    """H_A = P^2, H_B = Q^2 in a Fock basis of size dim."""
    ops = fock_operators(dim)
    return SplitModel(ops.P2, ops.Q2, "P^2", "Q^2")
