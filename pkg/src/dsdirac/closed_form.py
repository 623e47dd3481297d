"""Hypergeometric fundamental solutions of the closed-slicing mode equation.

With ``z(T) = e^{-T}/(e^T + e^{-T})``,

    u+ = e^{-imT} ( 2F1(-lam, lam; 1/2+im; z),
                    -2 lam/(2m-i) sech(T)/2 * 2F1(1-lam, 1+lam; 3/2+im; z) )

and u- = (-conj(u+_2), conj(u+_1)).  u+ tends to
(e^{-imT}, 0) and u- to (0, e^{imT}) as T -> +infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .modes import CLOSED, ModeParams, sech
from .special import hyp2f1, hyp2f1_derivative, log_gamma

__all__ = [
    "AsymptoticData",
    "z_of_T",
    "exact_u_plus",
    "exact_u_minus",
    "exact_u",
    "exact_u_derivative",
    "closed_hamiltonian",
    "ode_residual",
    "past_coefficient_gamma_ratio",
    "asymptotic_coeffs_closed_exact",
]

PLUS = "plus"
MINUS = "minus"


@dataclass(frozen=True)
class AsymptoticData:
    """Plane-wave coefficients of one solution at the temporal boundaries.

    Closed slicing fills ``f_plus`` (T -> +inf) and/or ``f_minus``
    (T -> -inf); flat slicing fills ``f_inf`` (t -> +inf) and/or ``g`` (the
    past boundary tau -> -inf).
    """

    slicing: str
    f_plus: np.ndarray | None = None
    f_minus: np.ndarray | None = None
    f_inf: np.ndarray | None = None
    g: np.ndarray | None = None
    extraction_time: float = math.inf
    error_estimate: float = 0.0

    @property
    def coefficients(self) -> np.ndarray:
        for v in (self.f_minus, self.g, self.f_plus, self.f_inf):
            if v is not None:
                return v
        raise ValueError("no coefficients stored")


def z_of_T(T: float) -> tuple[float, float]:
    """(z, 1 - z) with z = 1/(1 + e^{2T}), both to full relative precision."""
    T = float(T)
    if T >= 0:
        e = math.exp(-2.0 * T)
        return e / (1.0 + e), 1.0 / (1.0 + e)
    e = math.exp(2.0 * T)
    return 1.0 / (1.0 + e), e / (1.0 + e)


def _closed(p: ModeParams) -> None:
    if p.slicing != CLOSED:
        raise PreconditionError("closed-slicing mode required")


def _components_plus(T: float, m: float, lam: float, derivative: bool):
    z, w = z_of_T(T)
    c1 = 0.5 + 1j * m
    ph = cmath.exp(-1j * m * T)
    pref = -2.0 * lam / (2.0 * m - 1j)
    half_sech = 0.5 * sech(T)
    F1 = hyp2f1(-lam, lam, c1, z, one_minus_z=w)
    F2 = hyp2f1(1.0 - lam, 1.0 + lam, c1 + 1.0, z, one_minus_z=w)
    u1 = ph * F1
    u2 = pref * ph * half_sech * F2
    if not derivative:
        return u1, u2
    dz = -2.0 * z * w
    dF1 = hyp2f1_derivative(-lam, lam, c1, z, one_minus_z=w)
    dF2 = hyp2f1_derivative(1.0 - lam, 1.0 + lam, c1 + 1.0, z, one_minus_z=w)
    du1 = -1j * m * u1 + ph * dF1 * dz
    # d/dT [sech(T)/2] = -tanh(T) sech(T)/2
    du2 = pref * ph * half_sech * ((-1j * m - math.tanh(T)) * F2 + dF2 * dz)
    return du1, du2


def exact_u_plus(T: float, p: ModeParams) -> np.ndarray:
    """Fundamental solution with future asymptotics (e^{-imT}, 0)."""
    _closed(p)
    return np.array(_components_plus(T, p.m, p.lam, False))


def exact_u_minus(T: float, p: ModeParams) -> np.ndarray:
    """Fundamental solution with future asymptotics (0, e^{imT})."""
    _closed(p)
    u1, u2 = _components_plus(T, p.m, p.lam, False)
    return np.array([-u2.conjugate(), u1.conjugate()])


def exact_u(T: float, p: ModeParams, branch: str = PLUS) -> np.ndarray:
    if branch == PLUS:
        return exact_u_plus(T, p)
    if branch == MINUS:
        return exact_u_minus(T, p)
    raise PreconditionError(f"branch must be 'plus' or 'minus', got {branch!r}")


def exact_u_derivative(T: float, p: ModeParams, branch: str = PLUS) -> np.ndarray:
    """du/dT from the derivative rule for 2F1 and the chain rule through z(T)."""
    _closed(p)
    d1, d2 = _components_plus(T, p.m, p.lam, True)
    if branch == PLUS:
        return np.array([d1, d2])
    if branch == MINUS:
        return np.array([-d2.conjugate(), d1.conjugate()])
    raise PreconditionError(f"branch must be 'plus' or 'minus', got {branch!r}")


def closed_hamiltonian(T: float, p: ModeParams) -> np.ndarray:
    c = -p.lam * sech(T)
    return np.array([[p.m, c], [c, -p.m]], dtype=complex)


def ode_residual(T: float, p: ModeParams, branch: str = PLUS) -> float:
    """|| i du/dT - H(T) u || for an exact solution."""
    u = exact_u(T, p, branch)
    du = exact_u_derivative(T, p, branch)
    return float(np.linalg.norm(1j * du - closed_hamiltonian(T, p) @ u))


def past_coefficient_gamma_ratio(m: float, lam: float) -> complex:
    """pi Gamma(1/2+im) / (cosh(pi m) Gamma(1/2-im) Gamma(1/2+im-lam) Gamma(1/2+im+lam))."""
    c = 0.5 + 1j * m
    log_ratio = (
        log_gamma(c) - log_gamma(c.conjugate()) - log_gamma(c - lam) - log_gamma(c + lam)
    )
    return math.pi * cmath.exp(log_ratio) / math.cosh(math.pi * m)


def asymptotic_coeffs_closed_exact(p: ModeParams, branch: str = PLUS) -> AsymptoticData:
    """Closed-form coefficients of u+ or u- at both temporal boundaries."""
    _closed(p)
    a1 = past_coefficient_gamma_ratio(p.m, p.lam)
    a2 = -1j * math.sin(math.pi * p.lam) / math.cosh(math.pi * p.m)
    if branch == PLUS:
        return AsymptoticData(CLOSED, f_plus=np.array([1.0, 0.0], dtype=complex),
                              f_minus=np.array([a1, a2]))
    if branch == MINUS:
        # from u- = (-conj(u+_2), conj(u+_1)); note -conj(a2) = a2
        return AsymptoticData(CLOSED, f_plus=np.array([0.0, 1.0], dtype=complex),
                              f_minus=np.array([a2, a1.conjugate()]))
    raise PreconditionError(f"branch must be 'plus' or 'minus', got {branch!r}")

