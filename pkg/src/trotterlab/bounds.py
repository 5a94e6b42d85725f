"""Closed-form constants, exponents and Trotter error bounds.

Exponent reports carry the decay rate delta of an O(n^{-delta}) statement;
error-bound reports carry the bound itself. Invalid parameter combinations
are returned as reports with ``valid=False`` instead of raising.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict

from .errors import InvalidBound
from .regularity import EnergyBudget


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    inputs: Dict[str, Any] = field(default_factory=dict)
    valid: bool = True
    validity_reason: str = ""

    def __post_init__(self):
        if not self.valid and not self.validity_reason:
            raise ValueError("an invalid report needs a reason")
        if self.valid and not math.isfinite(self.value):
            raise ValueError("a valid report needs a finite value")

    def to_dict(self):
        return {"name": self.name, "value": self.value, "valid": self.valid,
                "validity_reason": self.validity_reason, "inputs": dict(self.inputs)}


def _report(name, value, inputs, problems):
    if problems:
        return BoundReport(name, value, inputs, False, "; ".join(problems))
    return BoundReport(name, value, inputs, True, "")


# ---------------------------------------------------------------- perturbative regime

def perturbative_constants(a, b, a2, b2):
    """(c0, c1, c2) for relative bounds (a, b) of L w.r.t. A and (a2, b2) on the graph norm."""
    if a >= 1 or a2 >= 1:
        raise InvalidBound(f"relative bounds must be < 1, got a={a}, a'={a2}")
    if min(a, b, a2, b2) < 0:
        raise InvalidBound("relative bounds must be nonnegative")
    den = (1 - a) * (1 - a2)
    c2 = (a + a2) * (1 + a + a2) / den
    c1 = b * (1 + a) / (1 - a)
    c0 = (a + a2) * (2 * b + (2 - a) * b2) / den + 2 * b * b / (1 - a) + b2
    return c0, c1, c2


def perturbative_bound(a, b, a2, b2, t, n, norm_x, norm_Ax, norm_A2x) -> BoundReport:
    """t^2/(2n) * (c2 ||A^2 x|| + c1 ||A x|| + c0 ||x||)."""
    c0, c1, c2 = perturbative_constants(a, b, a2, b2)
    val = t * t / (2 * n) * (c2 * norm_A2x + c1 * norm_Ax + c0 * norm_x)
    return BoundReport("perturbative_bound", val,
                       {"a": a, "b": b, "a_prime": a2, "b_prime": b2, "c0": c0, "c1": c1, "c2": c2,
                        "t": t, "n": n})


# ---------------------------------------------------------------- Favard-space exponents

def _k(gamma):
    return 0 if gamma <= 1 else 1


def favard_exponent(alpha, beta, gamma, mode="general") -> BoundReport:
    """delta = min{1, beta, gamma - alpha}.

    ``mode="general"`` needs alpha < min{1,gamma} and k_gamma < beta <= gamma < 2;
    ``mode="self_adjoint"`` relaxes the lower bound on beta to gamma - 1 < beta.
    """
    problems = []
    if not alpha < min(1.0, gamma):
        problems.append("α ≥ min{1,γ}")
    if mode == "general":
        if not _k(gamma) < beta:
            problems.append(f"β ≤ k_γ = {_k(gamma)}")
    elif mode == "self_adjoint":
        if not gamma - 1 < beta:
            problems.append("β ≤ γ−1")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not beta <= gamma:
        problems.append("β > γ")
    if not gamma < 2:
        problems.append("γ ≥ 2")
    if min(alpha, beta, gamma) <= 0:
        problems.append("parameters must be positive")
    val = min(1.0, beta, gamma - alpha)
    return _report("favard_exponent", val, {"alpha": alpha, "beta": beta, "gamma": gamma, "mode": mode,
                                            "k_gamma": _k(gamma)}, problems)


def graph_norm_exponent(alpha, beta, eps=0.0) -> BoundReport:
    """delta = min{beta, 1 - alpha - eps} on D(A) -> X, for 0 < alpha, beta < 1.

    eps = 0 is the Hilbert-space (or gamma = 1 Favard) statement; eps > 0 the
    Banach-space variant with fractional-power domains.
    """
    problems = []
    if not (0 < alpha < 1):
        problems.append("α ∉ (0,1)")
    if not (0 < beta < 1):
        problems.append("β ∉ (0,1)")
    if eps < 0:
        problems.append("ε < 0")
    val = min(beta, 1.0 - alpha - eps)
    if val <= 0:
        problems.append("nonpositive exponent")
    return _report("graph_norm_exponent", val, {"alpha": alpha, "beta": beta, "eps": eps}, problems)


def coulomb_rate(a, d, gamma, beta) -> BoundReport:
    """Decay rate min{gamma - d/4, beta, 1} for V = +-|x|^{-a} on R^d, H^{2 gamma} -> L^2."""
    problems = []
    if not (0 < a < d / 2):
        problems.append("a ≥ d/2" if a >= d / 2 else "a ≤ 0")
    if not (0 < gamma < 2):
        problems.append("γ ∉ (0,2)")
    cap = min((d - 2 * a) / (4 * a), (d - 2 * a) / 4, gamma - 0.5) if a > 0 else float("nan")
    if not gamma - 1 < beta:
        problems.append("β ≤ γ−1")
    if not beta < cap:
        problems.append(f"β ≥ min{{(d−2a)/(4a), (d−2a)/4, γ−1/2}} = {cap:g}")
    terms = {"smoothing": gamma - d / 4, "potential": beta, "first_order": 1.0}
    val = min(terms.values())
    if val <= 0:
        problems.append("nonpositive decay rate")
    return _report("coulomb_rate", val, {"a": a, "d": d, "gamma": gamma, "beta": beta, "cap": cap,
                                         "terms": terms}, problems)


def many_body_rate(eps) -> BoundReport:
    """Exponent 1/4 - eps; the prefactor C_{eps,N,M} is not known in closed form."""
    problems = []
    if not eps > 0:
        problems.append("ε ≤ 0")
    if not eps < 0.25:
        problems.append("ε ≥ 1/4 (nonpositive exponent)")
    return _report("many_body_rate", 0.25 - eps, {"eps": eps, "constant": "unknown"}, problems)


# ---------------------------------------------------------------- energy-limited regime

def schrodinger_constants(V2_sup, V1_at_0):
    """nu = 5 ||V''||_inf + 4 |V'(0)| and gamma = max{2 nu, 20}."""
    nu = 5 * V2_sup + 4 * abs(V1_at_0)
    return {"nu": nu, "gamma": max(2 * nu, 20)}


def schrodinger_bound(nu, gamma, t, n, normNpsi) -> BoundReport:
    if n < 1:
        raise InvalidBound("n must be >= 1")
    val = t * t / (2 * n) * nu * math.exp(gamma * t) * normNpsi
    return BoundReport("schrodinger_bound", val,
                       {"nu": nu, "gamma": gamma, "t": t, "n": n, "normNpsi": normNpsi})


def oscillator_bound(t, n, normNpsi) -> BoundReport:
    """6 t^2 ||N psi|| / n, valid for n >= 55 t."""
    if n < 1 or t < 0:
        raise InvalidBound("need n >= 1 and t >= 0")
    val = 6 * t * t * normNpsi / n
    problems = [] if n >= 55 * t else [f"n = {n} < 55t = {55 * t:g}"]
    return _report("oscillator_bound", val, {"t": t, "n": n, "normNpsi": normNpsi}, problems)


def energy_limited_bound(t, n, M, budget: EnergyBudget, E1, energy_preserving=False) -> BoundReport:
    """t^2/(2n) M sqrt(e^{2 omega t}(E+E0) + E1 - E0); energy-preserving: t^2/(2n) M e^{omega t/n} sqrt(E+E0)."""
    if n < 1:
        raise InvalidBound("n must be >= 1")
    E, E0, w = budget.E, budget.E0, budget.omega
    inputs = {"t": t, "n": n, "M": M, "E": E, "E0": E0, "omega": w, "E1": E1,
              "energy_preserving": energy_preserving}
    if energy_preserving:
        if E1 != E0:
            raise InvalidBound(f"energy-preserving mode needs E1 = E0, got E1={E1}, E0={E0}")
        rad = E + E0
        if rad < 0:
            raise InvalidBound(f"negative radicand {rad}")
        val = t * t / (2 * n) * M * math.exp(w * t / n) * math.sqrt(rad)
    else:
        rad = math.exp(2 * w * t) * (E + E0) + E1 - E0
        if rad < 0:
            raise InvalidBound(f"negative radicand {rad}")
        val = t * t / (2 * n) * M * math.sqrt(rad)
    return BoundReport("energy_limited_bound", val, inputs)


def dirac_constants(B0, eps):
    """omega, E0, M, E1 for the magnetic Dirac splitting."""
    if B0 <= 0 or eps <= 0:
        raise InvalidBound("B0 and eps must be positive")
    omega = 2 * eps * max(1.0, B0)
    E0 = 4 / (eps * omega) * (2 + 1 / eps ** 2) * max(B0, 1.0)
    return {"omega": omega, "E0": E0, "M": B0 * (math.sqrt(6) + 1), "E1": 2.0}
