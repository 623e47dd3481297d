"""Asymptotic plane-wave coefficients of mode solutions, for both slicings.

Closed slicing: u(T) ~ (e^{-imT} f1, e^{imT} f2) as T -> +-inf.

Flat slicing, future: u(t) ~ (e^{-imt} f1, e^{imt} f2) as t -> +inf.  Flat
slicing, past boundary (conformal time tau -> -inf):

    u(tau) ~ U(tau) (g1 e^{-i phi(tau)}, g2 e^{i phi(tau)})

with the rotation U(tau) = [[cos a, sin a], [-sin a, cos a]],
a = -arctan(lam tau / m)/2, and the phase phi of :func:`phase_integral`.
"""

from __future__ import annotations

import cmath
import functools
import math

import numpy as np
from scipy import integrate as _quad

from .closed_form import PLUS, MINUS, AsymptoticData, exact_u
from .errors import NotConvergedError, PreconditionError, SingularTimeError
from .integrate import DEFAULT_ATOL, DEFAULT_RTOL, dopri5, integrate
from .modes import (
    CLOSED,
    CLOSED_PHASE_STRIPPED,
    CLOSED_T,
    FLAT,
    FLAT_COSMOLOGICAL,
    FLAT_PHASE_STRIPPED,
    ModeParams,
)

__all__ = [
    "FUTURE",
    "PAST",
    "EXACT",
    "INTEGRATED",
    "default_extraction_time",
    "extract_asymptotics",
    "phase_integral",
    "phase_correction",
    "phase_correction_quadrature",
    "boundary_rotation",
    "boundary_coefficients",
    "boundary_amplitude",
    "flat_fundamental_values",
    "flat_far_time",
]

FUTURE = "future"
PAST = "past"
EXACT = "exact"
INTEGRATED = "integrated"

DEFAULT_EXTRACT_TOL = 1e-8
DEFAULT_TAU_EXTRACT = -1e4
RICHARDSON_SHIFT = 5.0
_AUDIT_TOL = 1e-10
_FAR_MARGIN = 36.0  # |lam| e^{-t_far} = e^{-36} ~ 2e-16


def default_extraction_time(p: ModeParams, tol: float = DEFAULT_EXTRACT_TOL) -> float:
    """max(25, ln(2|lam|/tol)): where the plane-wave remainder drops below tol."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    lam = abs(p.lam)
    if lam == 0:
        return 25.0
    return max(25.0, math.log(2.0 * lam / tol))


def _branch_vector(branch: str) -> np.ndarray:
    if branch == PLUS:
        return np.array([1.0, 0.0], dtype=complex)
    if branch == MINUS:
        return np.array([0.0, 1.0], dtype=complex)
    raise PreconditionError(f"branch must be 'plus' or 'minus', got {branch!r}")


def _strip(u: np.ndarray, m: float, t: float) -> np.ndarray:
    return np.array([cmath.exp(1j * m * t) * u[0], cmath.exp(-1j * m * t) * u[1]])


def _dress(f: np.ndarray, m: float, t: float) -> np.ndarray:
    return np.array([cmath.exp(-1j * m * t) * f[0], cmath.exp(1j * m * t) * f[1]])


# ---------------------------------------------------------------- phase


def _correction_closed(S: float, m: float, L: float) -> float:
    # int_{-inf}^{-S} (sqrt(L^2 + m^2/s^2) - L) ds
    #   = m asinh(m/(L S)) - (sqrt(L^2 S^2 + m^2) - L S)
    root = math.hypot(L * S, m)
    return m * math.asinh(m / (L * S)) - m * m / (root + L * S)


def _correction_quad(S: float, m: float, L: float) -> float:
    # substitute x = 1/s on (0, 1/S]: integrand (sqrt(L^2 + m^2 x^2) - L)/x^2
    def g(x):
        if x == 0.0:
            return 0.5 * m * m / L
        return m * m / (math.sqrt(L * L + m * m * x * x) + L)

    val, _ = _quad.quad(g, 0.0, 1.0 / S, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


@functools.lru_cache(maxsize=1)
def _antiderivative_trusted() -> bool:
    for m, L, S in ((1.0, 1.0, 5.0), (0.3, 2.5, 0.7), (4.0, 0.5, 100.0), (1.0, 1.0, 1e3)):
        if abs(_correction_closed(S, m, L) - _correction_quad(S, m, L)) > _AUDIT_TOL:
            return False
    return True


def phase_correction(tau: float, p: ModeParams) -> float:
    """phi(tau) - |lam| tau; positive, and O(m^2/(2|lam||tau|)) as tau -> -inf."""
    tau = float(tau)
    if not tau < 0:
        raise SingularTimeError(f"conformal time must be negative, got {tau!r}")
    L = abs(p.lam)
    if L == 0:
        raise PreconditionError("the boundary phase needs lam != 0")
    if _antiderivative_trusted():
        return _correction_closed(-tau, p.m, L)
    return _correction_quad(-tau, p.m, L)


def phase_correction_quadrature(tau: float, p: ModeParams) -> float:
    """:func:`phase_correction` by adaptive quadrature (the audit reference)."""
    tau = float(tau)
    if not tau < 0:
        raise SingularTimeError(f"conformal time must be negative, got {tau!r}")
    if p.lam == 0:
        raise PreconditionError("the boundary phase needs lam != 0")
    return _correction_quad(-tau, p.m, abs(p.lam))


def phase_integral(tau: float, p: ModeParams) -> float:
    """phi(tau) = |lam| tau + int_{-inf}^{tau} (sqrt(lam^2 + m^2/s^2) - |lam|) ds."""
    return abs(p.lam) * float(tau) + phase_correction(tau, p)


def boundary_rotation(tau: float, p: ModeParams) -> np.ndarray:
    """The real rotation U(tau) that diagonalizes the conformal generator."""
    a = -0.5 * math.atan(p.lam * tau / p.m)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, s], [-s, c]])


def boundary_coefficients(tau: float, u, p: ModeParams) -> np.ndarray:
    """g(tau) = diag(e^{i phi}, e^{-i phi}) U(tau)^T u(tau)."""
    phi = phase_integral(tau, p)
    v = boundary_rotation(tau, p).T @ np.asarray(u, dtype=complex)
    return np.array([cmath.exp(1j * phi) * v[0], cmath.exp(-1j * phi) * v[1]])


def boundary_amplitude(tau: float, g, p: ModeParams) -> np.ndarray:
    """Inverse of :func:`boundary_coefficients`: u = U(tau) diag(e^{-i phi}, e^{i phi}) g."""
    phi = phase_integral(tau, p)
    g = np.asarray(g, dtype=complex)
    v = np.array([cmath.exp(-1j * phi) * g[0], cmath.exp(1j * phi) * g[1]])
    return boundary_rotation(tau, p) @ v


def _evolve_boundary(p: ModeParams, tau0: float, g0, taus, rel_tol: float,
                     abs_tol: float) -> dict[float, np.ndarray]:
    """Carry g from tau0 back to every tau in ``taus`` (all <= tau0 < 0).

    In the rotating frame the conformal equation becomes
    dg/dtau = a'(tau) [[0, -e^{2i phi}], [e^{-2i phi}, 0]] g with
    a' = -lam m / (2 (m^2 + lam^2 tau^2)): anti-Hermitian and O(1/tau^2), so
    the norm is kept and long stretches need few steps.  Integrated in
    s = -tau.
    """
    m, lam = p.m, p.lam

    def f(s, g1, g2):
        tau = -s
        e = cmath.exp(2j * phase_integral(tau, p))
        a = -0.5 * lam * m / (m * m + lam * lam * tau * tau)
        return a * e * g2, -a * g1 / e

    s0 = -float(tau0)
    stops = sorted({-float(t) for t in taus})
    out = {float(tau0): np.asarray(g0, dtype=complex)}
    if stops and stops[-1] > s0:
        ts, ys, _, _ = dopri5(f, s0, g0, stops[-1], rel_tol, abs_tol, t_eval=stops)
        out.update({-float(s): y for s, y in zip(ts, ys)})
    return out


# ----------------------------------------------------- flat fundamental


def flat_far_time(p: ModeParams) -> float:
    """A time beyond which the flat coupling |lam| e^{-t} is below roundoff."""
    L = abs(p.lam)
    return max(30.0, (math.log(L) if L > 0 else 0.0) + _FAR_MARGIN)


def flat_fundamental_values(p: ModeParams, times, *, branch: str = PLUS,
                            chart: str = "cosmological", t_join: float = 0.0,
                            rel_tol: float = DEFAULT_RTOL,
                            abs_tol: float = DEFAULT_ATOL) -> np.ndarray:
    """u^{s,a} of a flat mode at the requested times, shape (n, 2).

    The fundamental solution with ``branch`` plus (minus) tends to
    (e^{-imt}, 0) (respectively (0, e^{imt})) as t -> +inf.  It is evolved
    in the phase-stripped form from far in the future down to ``t_join``
    and then, for earlier times, in the requested chart.  ``times`` are
    cosmological times, or conformal times when ``chart`` is "conformal".
    """
    if p.slicing != FLAT:
        raise PreconditionError("flat-slicing mode required")
    if chart not in ("cosmological", "conformal"):
        raise PreconditionError(f"chart must be 'cosmological' or 'conformal', got {chart!r}")
    times = np.asarray(times, dtype=float)
    if chart == "conformal":
        if np.any(times >= 0):
            raise SingularTimeError("conformal times must be negative")
        ts = -np.log(-times)
    else:
        ts = times
    t_far = max(flat_far_time(p), float(ts.max()) if len(ts) else 0.0)
    late = sorted(set(float(t) for t in ts if t >= t_join), reverse=True)
    stop = min(t_join, float(ts.min())) if len(ts) else t_join
    stop = max(stop, t_join)
    f_traj = integrate(FLAT_PHASE_STRIPPED, p, _branch_vector(branch), t_far, stop,
                       rel_tol, abs_tol, t_eval=late or None)
    lookup: dict[float, np.ndarray] = {}
    for t, f in zip(f_traj.times, f_traj.states):
        lookup[float(t)] = _dress(f, p.m, float(t))
    u_join = lookup[float(f_traj.times[-1])]

    out = np.empty((len(times), 2), dtype=complex)
    early = [i for i, t in enumerate(ts) if t < t_join]
    if early:
        if chart == "cosmological":
            pts = sorted({float(ts[i]) for i in early}, reverse=True)
            tr = integrate(FLAT_COSMOLOGICAL, p, u_join, t_join, pts[-1], rel_tol, abs_tol,
                           t_eval=pts)
            early_lookup = {float(t): u for t, u in zip(tr.times, tr.states)}
        else:
            # in the far past the conformal solution is carried in its
            # boundary coefficients, which avoids tracking |lam tau| / pi
            # oscillations one by one
            tau_join = -math.exp(-t_join)
            g_join = boundary_coefficients(tau_join, u_join, p)
            gs = _evolve_boundary(p, tau_join, g_join, [times[i] for i in early],
                                  rel_tol, abs_tol)
            early_lookup = {t: boundary_amplitude(t, g, p) for t, g in gs.items()}
    for i, t in enumerate(ts):
        if t >= t_join:
            out[i] = lookup[float(t)]
        else:
            key = float(times[i]) if chart == "conformal" else float(t)
            out[i] = early_lookup[key]
    return out


# ----------------------------------------------------------- extraction


def _closed_coefficients(source: str, p: ModeParams, branch: str, times, system: str,
                         rel_tol: float, abs_tol: float) -> list[np.ndarray]:
    if source == EXACT:
        return [_strip(exact_u(T, p, branch), p.m, T) for T in times]
    if source != INTEGRATED:
        raise PreconditionError(f"source must be 'exact' or 'integrated', got {source!r}")
    top = max(abs(t) for t in times) + RICHARDSON_SHIFT
    bottom = -top
    pts = sorted(set(float(t) for t in times), reverse=True)
    f0 = _branch_vector(branch)
    if system == CLOSED_PHASE_STRIPPED:
        tr = integrate(system, p, f0, top, bottom, rel_tol, abs_tol, t_eval=pts)
        found = {float(t): s for t, s in zip(tr.times, tr.states)}
        return [found[float(t)] for t in times]
    if system == CLOSED_T:
        tr = integrate(system, p, _dress(f0, p.m, top), top, bottom, rel_tol, abs_tol,
                       t_eval=pts)
        found = {float(t): s for t, s in zip(tr.times, tr.states)}
        return [_strip(found[float(t)], p.m, float(t)) for t in times]
    raise PreconditionError(f"unsupported closed system {system!r}")


def extract_asymptotics(source: str, p: ModeParams, T_extract: float | None = None,
                        direction: str = PAST, *, branch: str = PLUS,
                        tol: float = DEFAULT_EXTRACT_TOL, T_compare: float | None = None,
                        system: str | None = None, rel_tol: float = DEFAULT_RTOL,
                        abs_tol: float = DEFAULT_ATOL) -> AsymptoticData:
    """Read off the constant asymptotic coefficients of a fundamental solution.

    The known oscillation is stripped at ``T_extract`` and at a comparison
    time ``T_compare`` closer to the origin; their difference is the error
    estimate, and :class:`NotConvergedError` is raised if it exceeds ``tol``.

    For the flat past boundary ``T_extract`` is a conformal time (default
    -1e4, compared with ``T_extract/10``); the returned ``g`` is taken at
    ``T_extract``.
    """
    if direction not in (FUTURE, PAST):
        raise PreconditionError(f"direction must be 'future' or 'past', got {direction!r}")
    if p.slicing == CLOSED:
        sign = 1.0 if direction == FUTURE else -1.0
        if T_extract is None:
            T_extract = sign * default_extraction_time(p, tol)
        T_extract = float(T_extract)
        if T_extract * sign <= 0:
            raise PreconditionError(f"T_extract must have the sign of the {direction} end")
        if T_compare is None:
            T_compare = T_extract - sign * RICHARDSON_SHIFT
        sys_ = system or CLOSED_PHASE_STRIPPED
        c1, c2 = _closed_coefficients(source, p, branch, [T_extract, float(T_compare)],
                                      sys_, rel_tol, abs_tol)
        err = float(np.linalg.norm(c1 - c2))
        _check(err, tol, T_extract, T_compare)
        key = "f_plus" if direction == FUTURE else "f_minus"
        return AsymptoticData(CLOSED, extraction_time=T_extract, error_estimate=err,
                              **{key: c1})

    if source != INTEGRATED:
        raise PreconditionError("flat-slicing solutions are only available by integration")
    if direction == FUTURE:
        if T_extract is None:
            T_extract = default_extraction_time(p, tol)
        T_extract = float(T_extract)
        if T_compare is None:
            T_compare = T_extract - RICHARDSON_SHIFT
        us = flat_fundamental_values(p, [T_extract, float(T_compare)], branch=branch,
                                     rel_tol=rel_tol, abs_tol=abs_tol)
        c1 = _strip(us[0], p.m, T_extract)
        c2 = _strip(us[1], p.m, float(T_compare))
        err = float(np.linalg.norm(c1 - c2))
        _check(err, tol, T_extract, T_compare)
        return AsymptoticData(FLAT, f_inf=c1, extraction_time=T_extract, error_estimate=err)

    tau = DEFAULT_TAU_EXTRACT if T_extract is None else float(T_extract)
    if tau >= 0:
        raise SingularTimeError("the flat past boundary needs a negative conformal time")
    if T_compare is None:
        T_compare = tau / 10.0
    us = flat_fundamental_values(p, [tau, float(T_compare)], branch=branch, chart="conformal",
                                 rel_tol=rel_tol, abs_tol=abs_tol)
    g1 = boundary_coefficients(tau, us[0], p)
    g2 = boundary_coefficients(float(T_compare), us[1], p)
    err = float(np.linalg.norm(g1 - g2))
    _check(err, tol, tau, T_compare)
    return AsymptoticData(FLAT, g=g1, extraction_time=tau, error_estimate=err)


def _check(err: float, tol: float, t1: float, t2: float) -> None:
    if not err <= tol:
        raise NotConvergedError(
            f"coefficients at {t1} and {t2} differ by {err:.3e} > tol {tol:.1e}"
        )
