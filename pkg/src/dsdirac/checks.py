"""Verification suites: measured deviations against fixed tolerances.

Each check returns a :class:`Check` carrying the measured value and the
interval it must fall in.  Checks with ``informational=True`` are reported
but never fail a suite.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    INTEGRATED,
    PAST,
    boundary_coefficients,
    extract_asymptotics,
    flat_fundamental_values,
    phase_correction,
    phase_correction_quadrature,
    phase_integral,
)
from .closed_form import (
    MINUS,
    PLUS,
    asymptotic_coeffs_closed_exact,
    exact_u,
    ode_residual,
)
from .hadamard import ab_params, default_z_grid, gamma_product, singularity_exponents, two_point_scalars
from .integrate import integrate, integrate_phase_stripped, reconstruct_u
from .modes import (
    CLOSED_T,
    FLAT_CONFORMAL,
    FLAT_COSMOLOGICAL,
    ModeParams,
    build_spatial_spinors,
)
from .signature import (
    boundary_term,
    project_negative,
    signature_closed_form,
    signature_flat,
    signature_literal_printed,
    signature_minus_closed_form,
    signature_numeric,
    smear_decay_exponent,
    verify_mass_identity,
)
from .special import (
    hyp2f1,
    hyp2f1_derivative,
    hyp2f1_near_one,
    hyp2f1_series,
    log_gamma,
)

__all__ = [
    "Check",
    "SUITES",
    "GRID_MASSES",
    "GRID_LAMBDAS",
    "grid_modes",
    "run_suite",
    "run_suites",
]

GRID_MASSES = (0.25, 0.5, 1.0, 2.0, 4.0)
GRID_LAMBDAS = (1.5, -1.5, 2.5, -2.5, 3.5, -3.5, 5.5, -5.5)


def grid_modes() -> list[ModeParams]:
    return [ModeParams.closed(m, lam) for m in GRID_MASSES for lam in GRID_LAMBDAS]


@dataclass
class Check:
    name: str
    suite: str
    measured: float
    lower: float | None
    upper: float | None
    detail: str = ""
    informational: bool = False

    @property
    def passed(self) -> bool:
        x = self.measured
        if x is None or not math.isfinite(x):
            return False
        if self.lower is not None and x < self.lower:
            return False
        if self.upper is not None and x > self.upper:
            return False
        return True

    def record(self) -> dict:
        return {
            "name": self.name,
            "suite": self.suite,
            "measured": self.measured,
            "lower": self.lower,
            "upper": self.upper,
            "passed": self.passed,
            "informational": self.informational,
            "detail": self.detail,
        }


def _below(name, suite, value, tol, detail="", **kw) -> Check:
    return Check(name, suite, float(value), None, float(tol), detail, **kw)


def _within(name, suite, value, lo, hi, detail="", **kw) -> Check:
    return Check(name, suite, float(value), float(lo), float(hi), detail, **kw)


# ------------------------------------------------------------- special


def _special() -> list[Check]:
    s = "special"
    out = []
    ys = np.linspace(-10.0, 10.0, 41)
    dev = max(
        abs(math.exp(2.0 * log_gamma(0.5 + 1j * y).real) * math.cosh(math.pi * y) / math.pi - 1.0)
        for y in ys
    )
    out.append(_below("log_gamma_reflection_half_line", s, dev, 1e-12,
                      "relative error of |Gamma(1/2+iy)|^2 against pi/cosh(pi y)"))
    zs = [complex(x, y) for x in (-3.3, -0.7, 0.2, 1.5, 4.0, 9.5) for y in (-5.0, -0.3, 0.8, 7.0)]
    dev = 0.0
    for z in zs:
        lhs = cmath.exp(log_gamma(z) + log_gamma(1.0 - z))
        dev = max(dev, abs(lhs * cmath.sin(math.pi * z) / math.pi - 1.0))
    out.append(_below("log_gamma_reflection_formula", s, dev, 1e-12,
                      "relative error of Gamma(z)Gamma(1-z) against pi/sin(pi z)"))
    dev = max(abs(cmath.exp(log_gamma(z + 1.0) - log_gamma(z)) / z - 1.0) for z in zs)
    out.append(_below("log_gamma_recurrence", s, dev, 1e-12, "Gamma(z+1) = z Gamma(z)"))

    dev = 0.0
    for m in (0.25, 1.0, 4.0):
        for lam in (1.5, -2.5, 5.5):
            for sign in (1, -1):
                c = 0.5 + sign * 1j * m
                for z in np.linspace(0.508, 0.9, 50):
                    ref = hyp2f1_series(-lam, lam, c, z)
                    dev = max(dev, abs(hyp2f1_near_one(-lam, lam, c, z) - ref) / abs(ref))
    out.append(_below("connection_vs_series", s, dev, 1e-9,
                      "relative difference on 50 points of (0.5, 0.9]"))

    dev = 0.0
    h = 1e-5
    for a, b, c in ((-1.5, 1.5, 0.5 + 1j), (2.5, -2.5, 0.5 - 3j), (1 + 1j, 1 - 1j, 2.0)):
        for z in (0.1, 0.3, 0.6, 0.8):
            fd = (hyp2f1(a, b, c, z + h) - hyp2f1(a, b, c, z - h)) / (2 * h)
            d = hyp2f1_derivative(a, b, c, z)
            if abs(d) > 1e-8:
                dev = max(dev, abs(fd - d) / abs(d))
    out.append(_below("derivative_vs_finite_difference", s, dev, 1e-6))

    dev = 0.0
    for z in (0.0, 0.25, 0.5, 0.75, 0.99):
        # F(-3, b; c; z) is a cubic
        b, c = 1.5 + 0.5j, 0.5 + 2j
        poly = 1 - 3 * b / c * z + 3 * b * (b + 1) / (c * (c + 1)) * z**2 \
            - b * (b + 1) * (b + 2) / (c * (c + 1) * (c + 2)) * z**3
        dev = max(dev, abs(hyp2f1(-3, b, c, z) - poly) / abs(poly))
    out.append(_below("terminating_polynomial", s, dev, 1e-14))

    dev = 0.0
    for z in (0.2, 0.6, 0.95):
        a, b, c = -1.5 + 0.3j, 2.5, 0.5 + 2j
        dev = max(dev, abs(hyp2f1(a.conjugate(), b, c.conjugate(), z)
                           - hyp2f1(a, b, c, z).conjugate()))
    out.append(_below("conjugation_symmetry", s, dev, 1e-13))
    return out


# ----------------------------------------------------------------- ode


def _ode() -> list[Check]:
    s = "ode"
    out = []
    modes = grid_modes()
    Ts = np.linspace(-10.0, 10.0, 101)
    dev = max(ode_residual(T, p, br) for p in modes for T in Ts for br in (PLUS, MINUS))
    out.append(_below("exact_solution_residual", s, dev, 1e-9,
                      "||i du/dT - H u|| on 101 points of [-10, 10], all grid modes"))

    dev = max(abs(np.linalg.norm(asymptotic_coeffs_closed_exact(p, br).f_minus) ** 2 - 1.0)
              for p in modes for br in (PLUS, MINUS))
    out.append(_below("gamma_unitarity", s, dev, 1e-10, "|f1|^2 + |f2|^2 - 1 at T -> -inf"))

    dev = 0.0
    for p in modes:
        ref = asymptotic_coeffs_closed_exact(p).f_minus
        got = extract_asymptotics(INTEGRATED, p, -30.0, PAST).f_minus
        dev = max(dev, float(np.abs(got - ref).max()))
    out.append(_below("extraction_vs_closed_form", s, dev, 1e-6))

    p = ModeParams.closed(1.0, 1.5)
    tr = integrate(CLOSED_T, p, exact_u(-30.0, p), -30.0, 30.0)
    dev = float(np.abs(tr.final - exact_u(30.0, p)).max())
    out.append(_below("closed_integration_vs_exact", s, dev, 1e-7, "m=1, lam=3/2, T: -30 -> 30"))
    drift = abs(np.linalg.norm(tr.final) - np.linalg.norm(tr.states[0]))
    out.append(_below("norm_conservation_closed", s, drift, 100 * 1e-10))

    q = ModeParams.flat_lambda(1.0, 1.0)
    u0 = np.array([0.6, 0.8j])
    ts = list(np.linspace(5.0, -5.0, 11))
    cos = integrate(FLAT_COSMOLOGICAL, q, u0, 5.0, -5.0, t_eval=ts)
    conf = integrate(FLAT_CONFORMAL, q, u0, -math.exp(-5.0), -math.exp(5.0),
                     t_eval=[-math.exp(-t) for t in ts])
    dev = float(np.abs(cos.states[np.isin(cos.times, ts)]
                       - conf.states[np.isin(conf.times, [-math.exp(-t) for t in ts])]).max())
    out.append(_below("chart_equivalence", s, dev, 1e-8, "cosmological vs conformal on [-5, 5]"))
    drift = abs(np.linalg.norm(cos.final) - 1.0)
    out.append(_below("norm_conservation_flat", s, drift, 100 * 1e-10))

    fs = integrate_phase_stripped(q, u0, 0.0, 5.0)
    direct = integrate(FLAT_COSMOLOGICAL, q, u0, 0.0, 5.0)
    dev = float(np.abs(reconstruct_u(fs)[-1] - direct.final).max())
    out.append(_below("phase_stripped_reconstruction", s, dev, 1e-9, "t = 5"))

    fs = integrate_phase_stripped(q, [1.0, 0.0], 0.0, 30.0)
    logn = np.log(np.linalg.norm(fs.states, axis=1))
    t = fs.times
    excess = np.max(logn[1:] - logn[0] - abs(q.lam) * (math.exp(-t[0]) - np.exp(-t[1:])))
    out.append(_below("gronwall_inequality", s, excess, 1e-9,
                      "log||f(t)|| - log||f(0)|| - |lam|(1 - e^-t), maximum"))

    p = ModeParams.closed(2.0, -2.5)
    Tg = np.linspace(-20.0, 20.0, 81)
    ortho = max(abs(np.vdot(exact_u(T, p, PLUS), exact_u(T, p, MINUS))) for T in Tg)
    out.append(_below("orthogonality_transport", s, ortho, 1e-8))
    dets = [np.linalg.det(np.column_stack([exact_u(T, p, PLUS), exact_u(T, p, MINUS)])) for T in Tg]
    out.append(_below("wronskian_constant", s, max(abs(d - dets[0]) for d in dets), 1e-8))

    dev = 0.0
    for k in ((1, 0, 0), (0.3, -1.2, 0.5), (-2, 1, -3), (0, 0, 1), (0, 0, -2), (1e-3, 0, 1)):
        for chi in build_spatial_spinors(k):
            kn = math.hypot(*k)
            dev = max(dev, float(np.abs(chi.k_sigma() @ chi.chi - chi.s * kn * chi.chi).max()),
                      abs(np.linalg.norm(chi.chi) - 1.0))
    out.append(_below("spinor_eigen_relation", s, dev, 1e-13))

    dev = max(abs(phase_correction(tau, ModeParams.flat_lambda(m, lam))
                  - phase_correction_quadrature(tau, ModeParams.flat_lambda(m, lam)))
              for tau in (-0.5, -5.0, -100.0) for m in (0.25, 1.0, 3.0) for lam in (0.5, -2.0))
    out.append(_below("phase_antiderivative_vs_quadrature", s, dev, 1e-10))
    q = ModeParams.flat_lambda(1.0, 1.0)
    out.append(_below("phase_tail", s, abs(phase_correction(-1e6, q)), 2e-6))
    h = 1e-4
    fd = (phase_integral(-5 + h, q) - phase_integral(-5 - h, q)) / (2 * h)
    out.append(_below("phase_derivative", s, abs(fd - math.sqrt(1 + 1 / 25)), 1e-8))
    return out


# ----------------------------------------------------------- signature


def _matrix_checks(s: str, mats, label: str) -> list[Check]:
    herm = max(m.hermiticity_defect() for m in mats)
    tr = max(m.trace_defect() for m in mats)
    inv = [m.involution_defect() for m in mats if m.kind in ("S_plus", "S_minus")]
    eig = max(float(np.abs(m.eigenvalues()).max()) for m in mats)
    idem = comm = 0.0
    for m in mats:
        P = project_negative(m)
        idem = max(idem, float(np.abs(P @ P - P).max()), float(np.abs(P - P.conj().T).max()))
        comm = max(comm, float(np.abs(P @ m.entries - m.entries @ P).max()))
    out = [
        _below(f"{label}_hermiticity", s, herm, 1e-10),
        _below(f"{label}_trace", s, tr, 1e-10),
        _within(f"{label}_eigenvalue_bound", s, eig, 0.0, 1.0 + 1e-10,
                "largest |eigenvalue|"),
        _below(f"{label}_projector_idempotent", s, idem, 1e-10),
        _below(f"{label}_projector_commutes", s, comm, 1e-10),
    ]
    if inv:
        out.append(_below(f"{label}_involution", s, max(inv), 1e-8))
    return out


def _signature() -> list[Check]:
    s = "signature"
    out = []
    modes = grid_modes()
    dev = splus = 0.0
    literal = 0.0
    numeric, closed = [], []
    for p in modes:
        sp, sm, st = signature_numeric(p, 30.0)
        cf = signature_closed_form(p)
        numeric += [sp, sm, st]
        closed += [cf, signature_minus_closed_form(p)]
        dev = max(dev, float(np.abs(st.entries - cf.entries).max()))
        splus = max(splus, float(np.abs(sp.entries - np.diag([1, -1])).max()))
        literal = max(literal, float(np.abs(st.entries - signature_literal_printed(p)).max()))
    out.append(_below("numeric_vs_closed_form", s, dev, 1e-6,
                      "max entrywise |S_numeric - S_closed_form| over the grid"))
    out.append(_below("s_plus_is_sigma3", s, splus, 1e-8))
    out.append(_below("literal_offdiagonal_deviation", s, literal, 1e-6,
                      "numeric S_total vs the variant whose off-diagonal equals S^-'s",
                      informational=True))
    out += _matrix_checks(s, numeric, "numeric")
    out += _matrix_checks(s, closed, "closed_form")
    out += _matrix_checks(s, [signature_flat(ModeParams.flat_lambda(1.0, 1.0))], "flat")

    par = 0.0
    for m in GRID_MASSES:
        for lam in (1.5, 2.5, 3.5, 5.5):
            a = signature_closed_form(ModeParams.closed(m, lam)).entries
            b = signature_closed_form(ModeParams.closed(m, -lam)).entries
            par = max(par, abs(a[0, 0] - b[0, 0]), abs(a[0, 1] + b[0, 1]))
    out.append(_below("lambda_parity", s, par, 1e-12))
    P = project_negative(signature_flat(ModeParams.flat_lambda(1.0, 1.0)))
    out.append(_below("flat_projector", s, float(np.abs(P - np.diag([0, 1])).max()), 1e-15))
    return out


# ------------------------------------------------------------ boundary


G_TAUS = (-1e2, -1e3, -1e4)


def boundary_g(m: float, lam: float, taus=G_TAUS, branch: str = PLUS) -> np.ndarray:
    p = ModeParams.flat_lambda(m, lam)
    us = flat_fundamental_values(p, list(taus), branch=branch, chart="conformal")
    return np.array([boundary_coefficients(t, u, p) for t, u in zip(taus, us)]), us


def _boundary() -> list[Check]:
    s = "boundary"
    out = []
    g, us = boundary_g(1.0, 1.0)
    d_near = float(np.linalg.norm(g[1] - g[2]))
    d_far = float(np.linalg.norm(g[0] - g[1]))
    out.append(_below("g_stability", s, d_near, 1e-3, "|g(-1e3) - g(-1e4)|, m=1, lam=1"))
    out.append(_within("g_deviation_ratio", s, d_far / d_near, 8.0, 12.0,
                       "|g(-1e2) - g(-1e3)| / |g(-1e3) - g(-1e4)|"))

    p = ModeParams.flat_lambda(1.0, 1.0)
    rep = verify_mass_identity(p, 1.5, np.linspace(-5, 5, 21))
    out.append(_below("mass_identity", s, rep.max_residual, 1e-7, "m=1, m'=1.5, lam=1, t in [-5, 5]"))
    same = verify_mass_identity(p, 1.0, np.linspace(-5, 5, 11))
    out.append(_below("mass_identity_equal_masses", s, same.max_residual, 1e-7))
    p0 = ModeParams.flat_lambda(1.0, 0.0)
    rep0 = verify_mass_identity(p0, 1.5, np.linspace(-5, 5, 11))
    out.append(_below("mass_identity_lambda_zero", s, rep0.max_residual, 1e-12))

    g2, us2 = boundary_g(1.2, 1.0, taus=(-1e4,))
    B = boundary_term(g[2], g2[0]).value
    direct = complex(np.vdot(us[2], us2[0]))
    out.append(_below("boundary_term_vs_inner_product", s, abs(B - direct), 1e-4,
                      "m=1, m'=1.2, lam=1 at tau = -1e4"))
    out.append(_within("boundary_term_diagonal", s, boundary_term(g[2], g[2]).value.real, 0.0, math.inf))

    slope, res = smear_decay_exponent(1.0, (1.0, 2.0))
    out.append(_within("smear_decay_exponent", s, slope, -1.15, -0.85,
                       "fit over t = 10, 20, 40, 80; norms " + ", ".join(f"{x:.3e}" for x in res.norms())))
    return out


# ------------------------------------------------------------ hadamard


def _hadamard() -> list[Check]:
    s = "hadamard"
    out = []
    dev_f0 = h0 = 0.0
    for m, R in ((1.0, 1.0), (0.5, 2.0), (4.0, 0.5)):
        pref = -1j * gamma_product(m, R) / (8 * math.sqrt(2) * math.pi**2 * R**3)
        v = two_point_scalars(0.0, m, R)
        dev_f0 = max(dev_f0, abs(v.f - pref) / abs(pref))
        h0 = max(h0, abs(v.h))
    out.append(_below("f_at_zero", s, dev_f0, 1e-12))
    out.append(_below("h_at_zero", s, h0, 0.0))
    ab = ab_params(1.0, 1.0)
    out.append(_below("a_plus_b", s, abs(ab.a + ab.b - 4), 1e-14))
    for m, R in ((1.0, 1.0), (0.5, 2.0)):
        fit = singularity_exponents(m, R)
        fine = singularity_exponents(m, R, default_z_grid(20))
        tag = f"m={m:g}_R={R:g}"
        out.append(_within(f"p_f_{tag}", s, fit.p_f, -1.55, -1.45))
        out.append(_within(f"p_h_{tag}", s, fit.p_h, -1.05, -0.95))
        out.append(_below(f"refinement_{tag}", s,
                          max(abs(fit.p_f - fine.p_f), abs(fit.p_h - fine.p_h)), 0.01))
    Zs = np.linspace(0.5, 0.999, 40)
    vals = [two_point_scalars(z, 1.0, 1.0) for z in Zs]
    af = np.array([abs(v.f) for v in vals])
    ah = np.array([abs(v.h) for v in vals])
    viol = float(max(np.max(-np.diff(af), initial=0.0), np.max(-np.diff(ah), initial=0.0)))
    out.append(_below("monotone_magnitudes", s, viol, 0.0))
    sym = max(max(abs(v.f.real), abs(v.h.imag)) for v in vals)
    out.append(_below("phase_structure", s, sym, 0.0, "f purely imaginary, h real"))
    return out


SUITES = {
    "special": _special,
    "ode": _ode,
    "signature": _signature,
    "boundary": _boundary,
    "hadamard": _hadamard,
}


def run_suite(name: str) -> list[Check]:
    if name not in SUITES:
        raise KeyError(name)
    return list(SUITES[name]())


def run_suites(names) -> tuple[list[Check], dict[str, float]]:
    checks: list[Check] = []
    timing: dict[str, float] = {}
    for n in names:
        t0 = time.perf_counter()
        checks += run_suite(n)
        timing[n] = time.perf_counter() - t0
    return checks, timing
