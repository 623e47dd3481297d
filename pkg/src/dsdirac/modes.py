"""Separated Dirac-mode ODEs in the flat and closed de Sitter slicings.

Amplitudes ``u = (u1, u2)`` are complex numpy vectors of length 2.  Units:
the Hubble rate is 1, so the flat scale factor is ``e^t`` and the closed one
is ``cosh T``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAxisError, PreconditionError, SingularTimeError

__all__ = [
    "ModeParams",
    "FLAT",
    "CLOSED",
    "SYSTEMS",
    "rhs_flat_cosmological",
    "rhs_flat_conformal",
    "rhs_closed",
    "rhs_phase_stripped",
    "scalar_rhs",
    "sech",
    "SpatialSpinor",
    "build_spatial_spinors",
]

FLAT = "flat"
CLOSED = "closed"

FLAT_COSMOLOGICAL = "flat-cosmological"
FLAT_CONFORMAL = "flat-conformal"
FLAT_PHASE_STRIPPED = "flat-phase-stripped"
CLOSED_T = "closed"
CLOSED_PHASE_STRIPPED = "closed-phase-stripped"
SYSTEMS = (FLAT_COSMOLOGICAL, FLAT_CONFORMAL, FLAT_PHASE_STRIPPED, CLOSED_T, CLOSED_PHASE_STRIPPED)

TAU_SINGULAR = -1e-300
HALF_INTEGER_TOL = 1e-12


@dataclass(frozen=True)
class ModeParams:
    """Separation constants of one Dirac mode.

    Closed slicing: ``lam`` is an eigenvalue of the Dirac operator on the unit
    three-sphere (a half-odd integer with |lam| >= 3/2).  Flat slicing: ``k``
    is the spatial momentum, ``s`` the spin label, and ``lam = s*|k|``.

    ``allow_zero_lambda`` admits lam = 0 (decoupled, exactly solvable) for
    test purposes only; it is outside the physical spectrum.
    """

    slicing: str
    m: float
    lam: float
    k: tuple[float, float, float] | None = None
    s: int | None = None
    allow_zero_lambda: bool = False

    def __post_init__(self):
        if self.slicing not in (FLAT, CLOSED):
            raise PreconditionError(f"unknown slicing {self.slicing!r}")
        if not (math.isfinite(self.m) and self.m > 0):
            raise PreconditionError(f"mass must be positive and finite, got {self.m!r}")
        if not math.isfinite(self.lam):
            raise PreconditionError("lambda must be finite")
        if self.slicing == CLOSED:
            if self.lam == 0 and self.allow_zero_lambda:
                return
            twice = 2.0 * self.lam
            odd = round(twice)
            if abs(twice - odd) > HALF_INTEGER_TOL or odd % 2 == 0 or abs(self.lam) < 1.5:
                raise PreconditionError(
                    f"closed slicing needs lambda in {{+-3/2, +-5/2, ...}}, got {self.lam!r}"
                )
        else:
            if self.k is None or self.s not in (1, -1):
                raise PreconditionError("flat slicing needs a momentum k and spin s = +1 or -1")
            kn = math.hypot(*(float(x) for x in self.k))
            if kn == 0 and not self.allow_zero_lambda:
                raise PreconditionError("flat slicing needs k != 0")
            if abs(self.lam - self.s * kn) > 1e-12 * max(1.0, kn):
                raise PreconditionError(f"lambda must equal s*|k| = {self.s * kn}, got {self.lam}")

    @classmethod
    def closed(cls, m: float, lam: float, *, allow_zero_lambda: bool = False) -> "ModeParams":
        return cls(CLOSED, float(m), float(lam), allow_zero_lambda=allow_zero_lambda)

    @classmethod
    def flat(cls, m: float, k, s: int, *, allow_zero_lambda: bool = False) -> "ModeParams":
        k = tuple(float(x) for x in k)
        if len(k) != 3:
            raise PreconditionError("k must be a 3-vector")
        lam = s * math.hypot(*k)
        return cls(FLAT, float(m), lam, k=k, s=int(s), allow_zero_lambda=allow_zero_lambda)

    @classmethod
    def flat_lambda(cls, m: float, lam: float) -> "ModeParams":
        """Flat mode with momentum along the 1-axis and |k| = |lam|."""
        if lam == 0:
            return cls.flat(m, (0.0, 0.0, 0.0), 1, allow_zero_lambda=True)
        return cls.flat(m, (abs(lam), 0.0, 0.0), 1 if lam > 0 else -1)

    def with_mass(self, m: float) -> "ModeParams":
        return ModeParams(self.slicing, float(m), self.lam, self.k, self.s, self.allow_zero_lambda)


def sech(x: float) -> float:
    """1/cosh x without overflow."""
    e = math.exp(-abs(x))
    return 2.0 * e / (1.0 + e * e)


def _require(p: ModeParams, slicing: str) -> None:
    if p.slicing != slicing:
        raise PreconditionError(f"expected a {slicing} mode, got {p.slicing}")


def scalar_rhs(system: str, p: ModeParams):
    """Right-hand side ``f(t, u1, u2) -> (du1, du2)`` on Python complex scalars."""
    m, lam = p.m, p.lam
    if system == CLOSED_T:
        _require(p, CLOSED)

        def f(t, u1, u2):
            c = lam * sech(t)
            return -1j * (m * u1 - c * u2), -1j * (-c * u1 - m * u2)

    elif system == FLAT_COSMOLOGICAL:
        _require(p, FLAT)

        def f(t, u1, u2):
            c = lam * math.exp(-t)
            return -1j * (m * u1 - c * u2), -1j * (-c * u1 - m * u2)

    elif system == FLAT_CONFORMAL:
        _require(p, FLAT)

        def f(tau, u1, u2):
            if tau >= TAU_SINGULAR:
                raise SingularTimeError(f"conformal time must stay negative, got {tau!r}")
            d = m / tau
            return 1j * (d * u1 + lam * u2), 1j * (lam * u1 - d * u2)

    elif system == FLAT_PHASE_STRIPPED:
        _require(p, FLAT)

        def f(t, f1, f2):
            c = 1j * lam * math.exp(-t)
            ph = cmath.exp(2j * m * t)
            return c * ph * f2, c * f1 / ph

    elif system == CLOSED_PHASE_STRIPPED:
        _require(p, CLOSED)

        def f(t, f1, f2):
            c = 1j * lam * sech(t)
            ph = cmath.exp(2j * m * t)
            return c * ph * f2, c * f1 / ph

    else:
        raise PreconditionError(f"unknown system {system!r}")
    return f


def _vector(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2,):
        raise PreconditionError("amplitude must be a 2-vector")
    return u


def rhs_flat_cosmological(t: float, u, p: ModeParams) -> np.ndarray:
    """du/dt = -i [[m, -lam e^-t], [-lam e^-t, -m]] u."""
    u = _vector(u)
    return np.array(scalar_rhs(FLAT_COSMOLOGICAL, p)(float(t), u[0], u[1]))


def rhs_flat_conformal(tau: float, u, p: ModeParams) -> np.ndarray:
    """du/dtau = i [[m/tau, lam], [lam, -m/tau]] u, with tau = -e^-t < 0."""
    u = _vector(u)
    return np.array(scalar_rhs(FLAT_CONFORMAL, p)(float(tau), u[0], u[1]))


def rhs_closed(T: float, u, p: ModeParams) -> np.ndarray:
    """du/dT = -i [[m, -lam/cosh T], [-lam/cosh T, -m]] u."""
    u = _vector(u)
    return np.array(scalar_rhs(CLOSED_T, p)(float(T), u[0], u[1]))


def rhs_phase_stripped(t: float, f, p: ModeParams) -> np.ndarray:
    """Evolution of f where u = (e^{-imt} f1, e^{imt} f2) in the flat chart."""
    f = _vector(f)
    return np.array(scalar_rhs(FLAT_PHASE_STRIPPED, p)(float(t), f[0], f[1]))


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class SpatialSpinor:
    chi: np.ndarray
    s: int
    k: tuple[float, float, float]

    def k_sigma(self) -> np.ndarray:
        return sum(kc * sig for kc, sig in zip(self.k, PAULI))


def build_spatial_spinors(k, *, strict: bool = False) -> tuple[SpatialSpinor, SpatialSpinor]:
    """Orthonormal eigenvectors of k.sigma, returned as (chi_plus, chi_minus).

    ``chi_s`` satisfies (k.sigma) chi_s = s |k| chi_s.  The formulas are
    evaluated without cancellation, so they stay accurate arbitrarily close
    to the 3-axis; exactly on it the sigma_3 eigenvectors are returned.  With
    ``strict``, momenta within 1e-12 (relative) of the axis raise
    :class:`DegenerateAxisError` instead.
    """
    k = tuple(float(x) for x in k)
    if len(k) != 3:
        raise PreconditionError("k must be a 3-vector")
    k1, k2, k3 = k
    kn = math.hypot(k1, k2, k3)
    if kn == 0:
        raise PreconditionError("k must be nonzero")
    if strict and kn - abs(k3) < 1e-12 * kn:
        raise DegenerateAxisError(f"k={k} is (anti)parallel to the 3-axis")
    if k1 == 0.0 and k2 == 0.0:
        up = np.array([1, 0], dtype=complex)
        down = np.array([0, 1], dtype=complex)
        plus, minus = (up, down) if k3 > 0 else (down, up)
    else:
        # (|k|+k3, k1+ik2)/sqrt(2|k|(|k|+k3)) and (k3-|k|, k1+ik2)/sqrt(2|k|(|k|-k3)),
        # rewritten with bounded factors so nothing cancels or overflows
        perp = math.hypot(k1, k2)
        big = 1.0 + abs(k3) / kn
        a = math.sqrt(big / 2.0)
        b = (perp / kn) / math.sqrt(2.0 * big)
        # rescale first: k1 + ik2 divided by a subnormal perp is inexact
        scale = max(abs(k1), abs(k2))
        w = complex(k1 / scale, k2 / scale)
        ph = w / abs(w)
        if k3 >= 0:
            plus, minus = np.array([a, ph * b]), np.array([-b, ph * a])
        else:
            plus, minus = np.array([b, ph * a]), np.array([-a, ph * b])
    return SpatialSpinor(plus, 1, k), SpatialSpinor(minus, -1, k)
