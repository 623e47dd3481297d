"""Adaptive Dormand-Prince 5(4) integration of the two-component mode systems.

The stepper works on Python complex scalars: every system in this package is
a 2x2 linear ODE, and scalar arithmetic is several times faster than numpy
for vectors this small.  Backward integration reverses time in the
right-hand side, so the stepper itself only ever moves forward.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, StepSizeUnderflow
from .modes import (
    CLOSED_T,
    FLAT_CONFORMAL,
    FLAT_COSMOLOGICAL,
    FLAT_PHASE_STRIPPED,
    ModeParams,
    scalar_rhs,
)

__all__ = [
    "Trajectory",
    "integrate",
    "integrate_phase_stripped",
    "reconstruct_u",
    "dopri5",
    "CSV_HEADER",
    "CLOSED_T",
    "FLAT_CONFORMAL",
    "FLAT_COSMOLOGICAL",
    "FLAT_PHASE_STRIPPED",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
MAX_STEPS = 5_000_000
CSV_HEADER = ("t", "re_u1", "im_u1", "re_u2", "im_u2")

# Dormand & Prince (1980) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


def _check_tolerances(rtol: float, atol: float) -> None:
    for name, v in (("rel_tol", rtol), ("abs_tol", atol)):
        if not (1e-14 <= v <= 1e-2):
            raise PreconditionError(f"{name} must lie in [1e-14, 1e-2], got {v!r}")


def _initial_step(f, t0, y1, y2, d1, d2, rtol, atol, span):
    # Hairer, Norsett & Wanner, Solving ODEs I, sec. II.4
    sc1 = atol + rtol * abs(y1)
    sc2 = atol + rtol * abs(y2)
    n0 = math.sqrt(0.5 * ((abs(y1) / sc1) ** 2 + (abs(y2) / sc2) ** 2))
    n1 = math.sqrt(0.5 * ((abs(d1) / sc1) ** 2 + (abs(d2) / sc2) ** 2))
    h0 = 1e-6 if n0 < 1e-5 or n1 < 1e-5 else 0.01 * n0 / n1
    h0 = min(h0, span)
    e1, e2 = f(t0 + h0, y1 + h0 * d1, y2 + h0 * d2)
    n2 = math.sqrt(0.5 * ((abs(e1 - d1) / sc1) ** 2 + (abs(e2 - d2) / sc2) ** 2)) / h0
    if max(n1, n2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(n1, n2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def dopri5(f, t0: float, y0, t1: float, rtol: float, atol: float, *,
           t_eval=None, max_steps: int = MAX_STEPS):
    """Integrate ``f(t, y1, y2)`` forward from t0 to t1 > t0.

    Returns (times, states, derivatives, stats).  Every time in ``t_eval``
    (within the interval) is hit exactly by an accepted step.
    """
    y1, y2 = complex(y0[0]), complex(y0[1])
    t = float(t0)
    span = float(t1) - t
    stops = sorted(float(x) for x in (t_eval if t_eval is not None else ()) if t0 < x < t1)
    stops.append(float(t1))
    stop_i = 0

    d1, d2 = f(t, y1, y2)
    nfev = 1
    h = _initial_step(f, t, y1, y2, d1, d2, rtol, atol, span)
    nfev += 1
    ts, ys1, ys2, ds1, ds2 = [t], [y1], [y2], [d1], [d2]
    accepted = rejected = 0
    hmin_scale = 16 * np.finfo(float).eps

    while True:
        target = stops[stop_i]
        if accepted + rejected > max_steps:
            raise StepSizeUnderflow(f"exceeded {max_steps} steps at t={t}")
        if h < hmin_scale * max(1.0, abs(t)):
            raise StepSizeUnderflow(f"step size underflow at t={t} (h={h:.3e})")
        hit = t + h >= target
        hs = target - t if hit else h

        k1a, k1b = d1, d2
        k2a, k2b = f(t + _C2 * hs, y1 + hs * _A21 * k1a, y2 + hs * _A21 * k1b)
        k3a, k3b = f(t + _C3 * hs, y1 + hs * (_A31 * k1a + _A32 * k2a),
                     y2 + hs * (_A31 * k1b + _A32 * k2b))
        k4a, k4b = f(t + _C4 * hs, y1 + hs * (_A41 * k1a + _A42 * k2a + _A43 * k3a),
                     y2 + hs * (_A41 * k1b + _A42 * k2b + _A43 * k3b))
        k5a, k5b = f(t + _C5 * hs,
                     y1 + hs * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a),
                     y2 + hs * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b))
        k6a, k6b = f(t + hs,
                     y1 + hs * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a),
                     y2 + hs * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b))
        n1 = y1 + hs * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        n2 = y2 + hs * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        tn = target if hit else t + hs
        k7a, k7b = f(tn, n1, n2)
        nfev += 6

        e1 = hs * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        e2 = hs * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)
        s1 = atol + rtol * max(abs(y1), abs(n1))
        s2 = atol + rtol * max(abs(y2), abs(n2))
        err = math.sqrt(0.5 * ((abs(e1) / s1) ** 2 + (abs(e2) / s2) ** 2))

        if err <= 1.0:
            t, y1, y2, d1, d2 = tn, n1, n2, k7a, k7b
            ts.append(t)
            ys1.append(y1)
            ys2.append(y2)
            ds1.append(d1)
            ds2.append(d2)
            accepted += 1
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            if not hit:
                h = hs * fac
            else:
                h = max(h, hs * fac) if hs < h else hs * fac
                stop_i += 1
                if stop_i == len(stops):
                    break
        else:
            rejected += 1
            h = hs * max(0.2, 0.9 * err ** -0.2)

    states = np.column_stack([np.array(ys1), np.array(ys2)])
    derivs = np.column_stack([np.array(ds1), np.array(ds2)])
    stats = {"accepted": accepted, "rejected": rejected, "nfev": nfev}
    return np.array(ts), states, derivs, stats


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of one mode system.

    ``times`` is strictly monotone in the direction of integration.  ``at``
    interpolates between accepted steps with cubic Hermite polynomials.
    """

    times: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    system: str
    params: ModeParams
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.times, self.states, self.derivatives):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1].copy()

    @property
    def forward(self) -> bool:
        return len(self.times) < 2 or self.times[-1] > self.times[0]

    def at(self, t: float) -> np.ndarray:
        """State at time t by cubic Hermite interpolation on accepted steps."""
        ts = self.times if self.forward else self.times[::-1]
        ys = self.states if self.forward else self.states[::-1]
        ds = self.derivatives if self.forward else self.derivatives[::-1]
        t = float(t)
        if not (ts[0] <= t <= ts[-1]):
            raise PreconditionError(f"t={t} outside trajectory range [{ts[0]}, {ts[-1]}]")
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        ta, tb = ts[i], ts[i + 1]
        if t == ta:
            return ys[i].copy()
        if t == tb:
            return ys[i + 1].copy()
        h = tb - ta
        s = (t - ta) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * ys[i] + h10 * h * ds[i] + h01 * ys[i + 1] + h11 * h * ds[i + 1]

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.states) ** 2, axis=1))

    def to_csv(self, path) -> None:
        """Write ``t,re_u1,im_u1,re_u2,im_u2`` rows at 17 significant digits."""
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for t, (u1, u2) in zip(self.times, self.states):
                writer.writerow([_fmt(t), _fmt(u1.real), _fmt(u1.imag), _fmt(u2.real), _fmt(u2.imag)])


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def integrate(system: str, p: ModeParams, u0, t0: float, t1: float,
              rel_tol: float = DEFAULT_RTOL, abs_tol: float = DEFAULT_ATOL, *,
              t_eval=None) -> Trajectory:
    """Integrate one of the mode systems from t0 to t1 (either direction).

    ``system`` is one of ``"closed"``, ``"closed-phase-stripped"``,
    ``"flat-cosmological"``, ``"flat-conformal"`` or ``"flat-phase-stripped"``.
    """
    t0, t1 = float(t0), float(t1)
    if t0 == t1:
        raise PreconditionError("t0 and t1 must differ (empty integration interval)")
    if not (math.isfinite(t0) and math.isfinite(t1)):
        raise PreconditionError("integration limits must be finite")
    _check_tolerances(rel_tol, abs_tol)
    if system == FLAT_CONFORMAL and (t0 >= 0 or t1 >= 0):
        raise PreconditionError("conformal chart needs t0, t1 < 0")
    u0 = np.asarray(u0, dtype=complex)
    if u0.shape != (2,) or not np.all(np.isfinite(u0)):
        raise PreconditionError("u0 must be a finite 2-vector")
    f = scalar_rhs(system, p)

    if t1 > t0:
        ts, ys, ds, stats = dopri5(f, t0, u0, t1, rel_tol, abs_tol, t_eval=t_eval)
    else:
        def g(s, a, b):
            da, db = f(-s, a, b)
            return -da, -db

        rev_eval = None if t_eval is None else [-x for x in t_eval]
        ss, ys, ds, stats = dopri5(g, -t0, u0, -t1, rel_tol, abs_tol, t_eval=rev_eval)
        ts, ds = -ss, -ds
    return Trajectory(ts, ys, ds, system, p, stats)


def integrate_phase_stripped(p: ModeParams, f0, t0: float, t1: float,
                             rel_tol: float = DEFAULT_RTOL, abs_tol: float = DEFAULT_ATOL, *,
                             t_eval=None) -> Trajectory:
    """Flat-chart evolution of f with u = (e^{-imt} f1, e^{imt} f2).

    df/dt = i lam e^{-t} [[0, e^{2imt}], [e^{-2imt}, 0]] f.  The states of the
    returned trajectory are f, not u; see :func:`reconstruct_u`.
    """
    return integrate(FLAT_PHASE_STRIPPED, p, f0, t0, t1, rel_tol, abs_tol, t_eval=t_eval)


def reconstruct_u(traj: Trajectory) -> np.ndarray:
    """u(t) for every sample of a phase-stripped trajectory."""
    m = traj.params.m
    ph = np.exp(-1j * m * traj.times)
    return np.column_stack([ph * traj.states[:, 0], traj.states[:, 1] / ph])

