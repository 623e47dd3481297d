"""Maximally symmetric spinor two-point scalars on de Sitter space.

With a = 2 + i m R, b = 2 - i m R (R the de Sitter radius):

    f(Z) = -i Gamma(a) Gamma(b) / (8 sqrt2 pi^2 R^3) sqrt(1-Z) 2F1(a, b; 2; Z)
    h(Z) = -m Gamma(a) Gamma(b) / (32 pi^2 R^2)      sqrt(Z)   2F1(a, b; 3; Z)

Z = 1 is the coincidence limit.  Both hypergeometric series have integer
c - a - b, so they are summed directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitQualityError, PreconditionError
from .special import hyp2f1, log_gamma

__all__ = [
    "HypergeometricAB",
    "TwoPointScalars",
    "ab_params",
    "gamma_product",
    "two_point_scalars",
    "ExponentFit",
    "singularity_exponents",
    "default_z_grid",
    "FIT_RESIDUAL_TOL",
]

FIT_RESIDUAL_TOL = 0.02


@dataclass(frozen=True)
class HypergeometricAB:
    a: complex
    b: complex


@dataclass(frozen=True)
class TwoPointScalars:
    Z: float
    f: complex
    h: complex
    m: float
    R_abs: float


def _positive(name: str, x: float) -> float:
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise PreconditionError(f"{name} must be positive and finite, got {x!r}")
    return x


def ab_params(m: float, R_abs: float) -> HypergeometricAB:
    """a, b = 2 +- sqrt(m^2 R^2) with R^2 < 0, principal branch: 2 +- i m |R|."""
    m = _positive("m", m)
    R_abs = _positive("R_abs", R_abs)
    x = m * R_abs
    return HypergeometricAB(complex(2.0, x), complex(2.0, -x))


def gamma_product(m: float, R_abs: float) -> float:
    """Gamma(a) Gamma(b) = |Gamma(2 + i m R)|^2, real and positive."""
    ab = ab_params(m, R_abs)
    return math.exp(2.0 * log_gamma(ab.a).real)


def _prefactors(m: float, R_abs: float) -> tuple[complex, float]:
    g = gamma_product(m, R_abs)
    pf = -1j * g / (8.0 * math.sqrt(2.0) * math.pi**2 * R_abs**3)
    ph = -m * g / (32.0 * math.pi**2 * R_abs**2)
    return pf, ph


def two_point_scalars(Z: float, m: float, R_abs: float) -> TwoPointScalars:
    Z = float(Z)
    if not (0.0 <= Z < 1.0):
        raise PreconditionError(f"Z must lie in [0, 1), got {Z!r}")
    ab = ab_params(m, R_abs)
    pf, ph = _prefactors(m, R_abs)
    F2 = hyp2f1(ab.a, ab.b, 2.0, Z)
    F3 = hyp2f1(ab.a, ab.b, 3.0, Z)
    # conjugate parameters make both series real
    f = pf * math.sqrt(1.0 - Z) * F2.real
    h = ph * math.sqrt(Z) * F3.real + 0.0  # no signed zero at Z = 0
    return TwoPointScalars(Z, complex(f), complex(h), float(m), float(R_abs))


@dataclass(frozen=True)
class ExponentFit:
    p_f: float
    p_h: float
    residual_f: float
    residual_h: float


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    coef = np.polyfit(x, y, 1)
    resid = float(np.abs(np.polyval(coef, x) - y).max())
    return float(coef[0]), resid


def default_z_grid(n: int = 10) -> np.ndarray:
    """Z with 1 - Z geometric from 1e-2 down to 1e-3.

    The h series has a logarithmic subleading term, so the leading power is
    only clean within about a decade of the upper limit Z = 0.999.
    """
    return 1.0 - np.geomspace(1e-2, 1e-3, n)


def singularity_exponents(m: float, R_abs: float, Z_grid=None) -> ExponentFit:
    """Slopes of log|f| and log|h| against log(1 - Z) near Z = 1.

    The fit residual is the largest absolute deviation of a log value from
    the fitted line; above 0.02 the fit is rejected with FitQualityError.
    """
    Z = default_z_grid() if Z_grid is None else np.asarray(Z_grid, dtype=float)
    if Z.ndim != 1 or len(Z) < 8:
        raise PreconditionError("Z_grid needs at least 8 points")
    if np.any(Z < 0.9) or np.any(Z >= 1.0):
        raise PreconditionError("Z_grid must lie in [0.9, 1)")
    vals = [two_point_scalars(z, m, R_abs) for z in Z]
    x = np.log1p(-Z)
    p_f, r_f = _fit(x, np.log([abs(v.f) for v in vals]))
    p_h, r_h = _fit(x, np.log([abs(v.h) for v in vals]))
    worst = max(r_f, r_h)
    if worst > FIT_RESIDUAL_TOL:
        raise FitQualityError(f"log-log fit residual {worst:.3e} exceeds {FIT_RESIDUAL_TOL}")
    return ExponentFit(p_f, p_h, r_f, r_h)
