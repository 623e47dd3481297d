import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dsdirac.asymptotics import (
    EXACT,
    FUTURE,
    INTEGRATED,
    PAST,
    boundary_coefficients,
    boundary_rotation,
    default_extraction_time,
    extract_asymptotics,
    flat_fundamental_values,
    phase_correction,
    phase_correction_quadrature,
    phase_integral,
)
from dsdirac.closed_form import MINUS, PLUS, asymptotic_coeffs_closed_exact
from dsdirac.errors import NotConvergedError, PreconditionError, SingularTimeError
from dsdirac.integrate import FLAT_COSMOLOGICAL, integrate
from dsdirac.modes import CLOSED_T, ModeParams

P = ModeParams.closed(1.0, 1.5)
FLAT = ModeParams.flat_lambda(1.0, 1.0)


def test_default_extraction_time():
    assert default_extraction_time(P) == 25.0
    big = ModeParams.closed(1.0, 1e12 + 0.5)
    assert default_extraction_time(big, 1e-8) == pytest.approx(math.log(2e12 / 1e-8), rel=1e-9)


class TestClosedExtraction:
    def test_future_exact(self):
        d = extract_asymptotics(EXACT, P, 30.0, FUTURE)
        assert np.linalg.norm(d.f_plus - [1, 0]) < 1e-10

    def test_past_exact(self):
        d = extract_asymptotics(EXACT, P, -30.0, PAST)
        ref = asymptotic_coeffs_closed_exact(P).f_minus
        assert np.linalg.norm(d.f_minus - ref) < 1e-7

    @pytest.mark.parametrize("branch", [PLUS, MINUS])
    @pytest.mark.parametrize("system", [None, CLOSED_T])
    def test_past_integrated(self, branch, system):
        d = extract_asymptotics(INTEGRATED, P, -30.0, PAST, branch=branch, system=system)
        ref = asymptotic_coeffs_closed_exact(P, branch).f_minus
        assert np.linalg.norm(d.f_minus - ref) < 1e-6
        assert abs(np.linalg.norm(d.f_minus) - 1) < 1e-8
        assert d.error_estimate < 1e-8

    def test_not_converged(self):
        with pytest.raises(NotConvergedError):
            extract_asymptotics(EXACT, ModeParams.closed(1.0, 5.5), -3.0, PAST)

    def test_wrong_sign(self):
        with pytest.raises(PreconditionError):
            extract_asymptotics(EXACT, P, 30.0, PAST)

    def test_bad_direction(self):
        with pytest.raises(PreconditionError):
            extract_asymptotics(EXACT, P, 30.0, "sideways")


class TestPhase:
    def test_massless_limit(self):
        p = ModeParams.flat_lambda(1e-300, 2.0)
        assert phase_integral(-3.0, p) == -6.0

    def test_tail(self):
        assert abs(phase_correction(-1e6, FLAT)) < 2e-6

    def test_derivative(self):
        h = 1e-4
        fd = (phase_integral(-5 + h, FLAT) - phase_integral(-5 - h, FLAT)) / (2 * h)
        assert fd == pytest.approx(math.sqrt(1 + 1 / 25), abs=1e-8)

    def test_singular(self):
        with pytest.raises(SingularTimeError):
            phase_integral(0.0, FLAT)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.1, 4), st.floats(0.2, 5), st.floats(-1e5, -1e-2))
    def test_antiderivative_matches_quadrature(self, m, lam, tau):
        p = ModeParams.flat_lambda(m, lam)
        a, b = phase_correction(tau, p), phase_correction_quadrature(tau, p)
        assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


class TestFlatBoundary:
    def test_rotation_orthogonal(self):
        U = boundary_rotation(-7.0, FLAT)
        np.testing.assert_allclose(U @ U.T, np.eye(2), atol=1e-15)

    def test_rotation_diagonalizes_generator(self):
        tau = -3.0
        U = boundary_rotation(tau, FLAT)
        G = np.array([[FLAT.m / tau, FLAT.lam], [FLAT.lam, -FLAT.m / tau]])
        D = U.T @ G @ U
        assert abs(D[0, 1]) < 1e-14
        assert abs(abs(D[0, 0]) - math.sqrt(1 + 1 / 9)) < 1e-14

    def test_fundamental_future_normalization(self):
        t = 40.0
        u = flat_fundamental_values(FLAT, [t])[0]
        assert abs(u[0] * np.exp(1j * t) - 1) < 1e-12 and abs(u[1]) < 1e-12

    def test_fundamental_charts_agree(self):
        ts = [-3.0, 0.0, 2.0]
        a = flat_fundamental_values(FLAT, ts)
        b = flat_fundamental_values(FLAT, [-math.exp(-t) for t in ts], chart="conformal")
        assert np.abs(a - b).max() < 1e-8

    def test_fundamental_solves_ode(self):
        a = flat_fundamental_values(FLAT, [-2.0, 1.0])
        tr = integrate(FLAT_COSMOLOGICAL, FLAT, a[0], -2.0, 1.0)
        assert np.linalg.norm(tr.final - a[1]) < 1e-8

    def test_past_extraction(self):
        d = extract_asymptotics(INTEGRATED, FLAT, -1e4, PAST, tol=1e-3)
        assert d.g is not None and d.error_estimate < 1e-3
        assert abs(np.linalg.norm(d.g) - 1) < 1e-8

    def test_past_extraction_strict_tolerance(self):
        with pytest.raises(NotConvergedError):
            extract_asymptotics(INTEGRATED, FLAT, -1e2, PAST, tol=1e-12)

    def test_future_extraction(self):
        d = extract_asymptotics(INTEGRATED, FLAT, None, FUTURE, branch=MINUS)
        assert np.linalg.norm(d.f_inf - [0, 1]) < 1e-9

    def test_exact_source_rejected(self):
        with pytest.raises(PreconditionError):
            extract_asymptotics(EXACT, FLAT, -1e3, PAST)

    def test_g_converges(self):
        taus = [-1e2, -1e3, -1e4]
        us = flat_fundamental_values(FLAT, taus, chart="conformal")
        g = [boundary_coefficients(t, u, FLAT) for t, u in zip(taus, us)]
        assert np.linalg.norm(g[1] - g[2]) < 1e-3
        assert np.linalg.norm(g[1] - g[2]) < np.linalg.norm(g[0] - g[1])
