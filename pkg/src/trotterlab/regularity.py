"""Fractional norms, the Favard probe, operator E-norms and stability constants."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .errors import (DegenerateWindow, DimensionMismatch, InsufficientPoints, SearchBracketError,
                     SingularPencil)
from .matcore import HermitianOperator, StateVector

PENCIL_EPS = 1e-12


def _vec(psi, dim):
    x = psi.coeffs if isinstance(psi, StateVector) else np.asarray(psi, dtype=np.complex128)
    if x.shape[0] != dim:
        raise DimensionMismatch(f"operator dim {dim} vs state dim {x.shape[0]}")
    return x


def _mat(A):
    return A.matrix if isinstance(A, HermitianOperator) else np.asarray(A, dtype=np.complex128)


def spectral_weights(K: HermitianOperator, psi):
    """Eigenvalues of K and the weights |<v_j, psi>|^2."""
    x = _vec(psi, K.dim)
    es = K.eig
    c = es.coefficients(x)
    return es.eigenvalues, (c.conj() * c).real


def fractional_norm(K: HermitianOperator, gamma: float, psi) -> float:
    """|| |K|^gamma psi || by spectral calculus."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    x = _vec(psi, K.dim)
    if gamma == 0:
        return float(np.linalg.norm(x))
    lam, w = spectral_weights(K, x)
    return float(np.sqrt(np.sum(np.abs(lam) ** (2 * gamma) * w)))


# ---------------------------------------------------------------- Favard probe

@dataclass(frozen=True)
class FavardEstimate:
    r: float
    seminorm: float
    fitted_slope: float
    t_window: Tuple[float, float]
    grid_size: int

    @property
    def sane(self):
        return -0.5 <= self.fitted_slope <= 1.5


def default_probe_window(K: HermitianOperator):
    """[10 / max|lambda|, min(1, 0.1 / min nonzero |lambda|)]."""
    a = np.abs(K.eig.eigenvalues)
    nz = a[a > 0]
    if nz.size == 0:
        raise DegenerateWindow("generator is zero; no time scale to probe")
    lo = 10.0 / nz.max()
    hi = min(1.0, 0.1 / nz.min())
    return lo, hi


def loglog_slope(x, y):
    lx, ly = np.log(x), np.log(y)
    return float(np.polyfit(lx, ly, 1)[0])


def favard_probe(K: HermitianOperator, psi, t_window=None, grid_size: int = 64,
                 r: Optional[float] = None) -> FavardEstimate:
    """Fit the growth of d(t) = ||(e^{-itK} - I) psi|| on a log-uniform t grid.

    ``seminorm`` is max_t t^{-r} d(t); with ``r=None`` the fitted slope,
    clipped to [0, 1], is used as r.
    """
    if grid_size < 8:
        raise ValueError("grid_size must be >= 8")
    if t_window is None:
        t_window = default_probe_window(K)
    t_min, t_max = float(t_window[0]), float(t_window[1])
    if not (0 < t_min < t_max):
        raise DegenerateWindow(f"need 0 < t_min < t_max, got ({t_min}, {t_max})")
    lam, w = spectral_weights(K, psi)
    ts = np.geomspace(t_min, t_max, grid_size)
    d = kernels.increment_norms(lam, w, ts)
    ok = d > 0
    if ok.sum() < 2:
        raise InsufficientPoints("d(t) vanishes on the window (state in the kernel of K)")
    slope = loglog_slope(ts[ok], d[ok])
    rr = float(np.clip(slope, 0.0, 1.0)) if r is None else float(r)
    semi = float(np.max(ts ** (-rr) * d))
    return FavardEstimate(rr, semi, slope, (t_min, t_max), int(grid_size))


# ---------------------------------------------------------------- energy budgets

@dataclass(frozen=True, eq=False)
class EnergyBudget:
    E: float
    E0: float = 0.0
    omega: float = 0.0
    G: Optional[HermitianOperator] = None

    def __post_init__(self):
        for name in ("E", "E0", "omega"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if self.G is not None and self.G.eig.eigenvalues[0] < -1e-9:
            raise ValueError(f"reference Hamiltonian G is not positive semidefinite "
                             f"(min eigenvalue {self.G.eig.eigenvalues[0]:.3e})")


def f_energy(budget: EnergyBudget, t: float) -> float:
    """Maximal output energy e^{omega t}(E + E0) - E0."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(np.exp(budget.omega * t) * (budget.E + budget.E0) - budget.E0)


# ---------------------------------------------------------------- operator E-norm

@dataclass(frozen=True)
class LambdaSearch:
    lam_min: float = 1e-8
    lam_max: float = 1e8
    tolerance: float = 1e-10
    grid_points: int = 64


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _e0(AA, G, lam):
    return max(0.0, float(np.linalg.eigvalsh(AA - lam * G)[-1]))


def enorm_dual(A, G, E, lam):
    """sqrt(lam E + E0(lam)) for one multiplier lam."""
    Am = _mat(A)
    return float(np.sqrt(lam * E + _e0(Am.conj().T @ Am, _mat(G), lam)))


def operator_E_norm(A, budget: EnergyBudget, lam_search: LambdaSearch | None = None,
                    return_lambda: bool = False):
    """min over lam >= 0 of sqrt(lam E + E0(lam)), E0(lam) = max(0, lambda_max(A^dag A - lam G)).

    A 64-point log grid locates the minimum, which golden-section search on
    log lam then refines. The lam -> 0 limit (which equals ||A||) is always
    compared. A minimum on the upper end of the bracket raises SearchBracketError.
    """
    ls = lam_search or LambdaSearch()
    if budget.G is None:
        raise ValueError("budget needs a reference Hamiltonian G")
    if not budget.E > 0:
        raise ValueError("energy E must be positive")
    Am = _mat(A)
    G = budget.G.matrix
    if Am.shape != G.shape:
        raise DimensionMismatch(f"A shape {Am.shape} vs G shape {G.shape}")
    AA = Am.conj().T @ Am
    AA = 0.5 * (AA + AA.conj().T)
    E = float(budget.E)

    def f(u):
        lam = np.exp(u)
        return np.sqrt(lam * E + _e0(AA, G, lam))

    us = np.linspace(np.log(ls.lam_min), np.log(ls.lam_max), ls.grid_points)
    vals = np.array([f(u) for u in us])
    i = int(np.argmin(vals))
    f_zero = np.sqrt(_e0(AA, G, 0.0))
    if i == len(us) - 1:
        raise SearchBracketError(f"minimum on the upper bracket end lam_max={ls.lam_max:g}; widen the bracket",
                                 side="upper", lam=ls.lam_max)
    lo, hi = us[max(i - 1, 0)], us[i + 1]
    # golden section on log lam
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > ls.tolerance:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    cands = [(vals[i], us[i]), (fc, c), (fd, d)]
    best, ub = min(cands, key=lambda p: p[0])
    lam = float(np.exp(ub))
    if f_zero <= best:
        best, lam = f_zero, 0.0
    best = float(best)
    return (best, lam) if return_lambda else best


def enorm_bruteforce(A, budget: EnergyBudget, samples: int = 100_000, seed: int = 0,
                     restarts: int = 8) -> float:
    """Sampling oracle for sup{||A psi|| : ||psi|| <= 1, <psi, G psi> <= E}.

    Random complex vectors are scaled into the feasible set; the best few are
    polished with SLSQP. The result is a lower bound on the supremum.
    """
    from scipy.optimize import minimize

    if budget.G is None:
        raise ValueError("budget needs a reference Hamiltonian G")
    Am = _mat(A)
    G = budget.G.matrix
    d = G.shape[0]
    if d > 8:
        raise ValueError("the brute-force oracle is meant for dim <= 8")
    E = float(budget.E)
    AA = Am.conj().T @ Am
    AA = 0.5 * (AA + AA.conj().T)
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))
    vals = kernels.energy_samples(AA, G, Z, E)
    best = float(max(vals.max(), 0.0))

    def split(x):
        return x[:d] + 1j * x[d:]

    def quad(M, x):
        z = split(x)
        Mz = M @ z
        return float(np.vdot(z, Mz).real), np.concatenate([2 * Mz.real, 2 * Mz.imag])

    cons = [
        {"type": "ineq", "fun": lambda x: 1.0 - x @ x, "jac": lambda x: -2 * x},
        {"type": "ineq", "fun": lambda x: E - quad(G, x)[0], "jac": lambda x: -quad(G, x)[1]},
    ]
    for r in np.argsort(vals)[::-1][:restarts]:
        z = Z[r] / np.linalg.norm(Z[r])
        g = np.vdot(z, G @ z).real
        if g > E:
            z = z * np.sqrt(E / g)
        x0 = np.concatenate([z.real, z.imag])
        res = minimize(lambda x: tuple(-v for v in quad(AA, x)), x0, jac=True, method="SLSQP",
                       constraints=cons, options={"ftol": 1e-16, "maxiter": 1000})
        x = res.x
        # SLSQP may end slightly outside the constraints; shrink back in
        g = quad(G, x)[0]
        shrink = min(1.0, 1.0 / np.sqrt(x @ x), np.sqrt(E / g) if g > E else 1.0)
        best = max(best, quad(AA, shrink * x)[0])
    return float(np.sqrt(best))


# ---------------------------------------------------------------- stability constants

def _inv_sqrt(B, what, eps=PENCIL_EPS):
    B = 0.5 * (B + B.conj().T)
    w, W = np.linalg.eigh(B)
    if w[0] <= eps:
        raise SingularPencil(f"{what} has eigenvalue {w[0]:.3e} <= {eps:g}")
    return (W / np.sqrt(w)) @ W.conj().T


def stability_omega(H: HermitianOperator, G: HermitianOperator, E0: float, squared: bool = False,
                    subspace: Optional[int] = None) -> float:
    """Smallest constant in +-i[H,G] <= omega (G+E0) (linear) or ||[H,G]psi|| <= nu ||(G+E0)psi|| (squared).

    Quadratic forms are restricted to the span of the first ``subspace`` basis
    vectors; for Fock-basis G the default is dim // 4 (the truncation edge of
    N is excluded), otherwise the full space.
    """
    if H.dim != G.dim:
        raise DimensionMismatch(f"H dim {H.dim} vs G dim {G.dim}")
    dim = G.dim
    if subspace is None:
        subspace = dim // 4 if G.basis_tag.kind == "fock" else dim
    k = int(subspace)
    if not 1 <= k <= dim:
        raise ValueError(f"subspace size must be in [1, {dim}], got {k}")
    Hm, Gm = H.matrix, G.matrix
    comm = Hm @ Gm - Gm @ Hm
    B = Gm + E0 * np.eye(dim)
    if not squared:
        C = 1j * comm[:k, :k]
        C = 0.5 * (C + C.conj().T)
        S = _inv_sqrt(B[:k, :k], "G + E0")
        mu = np.linalg.eigvalsh(S @ C @ S)
        return float(np.max(np.abs(mu)))
    # generalised pencil (Ck^dag Ck, Bk^dag Bk); equals sigma_max([H,G](G+E0)^{-1}) on the full space
    Ck = comm[:, :k]
    Bk = B[:, :k]
    sv = np.linalg.svd(Bk, compute_uv=False)
    if sv.min() <= PENCIL_EPS:
        raise SingularPencil(f"G + E0 has singular value {sv.min():.3e} <= {PENCIL_EPS:g} on the subspace")
    S = _inv_sqrt(Bk.conj().T @ Bk, "(G + E0)^2", PENCIL_EPS ** 2)
    CC = Ck.conj().T @ Ck
    return float(np.sqrt(max(0.0, np.linalg.eigvalsh(S @ CC @ S)[-1])))
