import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dsdirac.errors import DegenerateSpectrumError, PreconditionError, QuadratureNotConverged
from dsdirac.modes import ModeParams
from dsdirac.signature import (
    FLAT_HALF,
    S_MINUS,
    S_PLUS,
    S_TOTAL,
    SIGMA3,
    InvariantViolation,
    SignatureMatrix,
    boundary_term,
    bump,
    mass_smear,
    project_negative,
    signature_closed_form,
    signature_flat,
    signature_literal_printed,
    signature_minus_closed_form,
    signature_numeric,
    verify_mass_identity,
)

P = ModeParams.closed(1.0, 1.5)
# corrected closed form at m = 1, lam = 3/2, from mpmath
S12_REF = complex(0.082966101038788554, 0.022431977159623664)
S11_REF = 0.99255804985720379

masses = st.floats(0.25, 4.0)
lambdas = st.sampled_from([1.5, -1.5, 2.5, -2.5, 3.5, -3.5, 4.5, -4.5, 5.5, -5.5])


class TestClosedForm:
    def test_reference_entries(self):
        S = signature_closed_form(P).entries
        assert S[0, 0].real == pytest.approx(S11_REF, abs=1e-14)
        assert abs(S[0, 1] - S12_REF) < 1e-14
        assert S.dtype == complex and S.flags.writeable is False

    def test_diagonal_formula(self):
        # (cos 2 pi lam + cosh 2 pi m) / (2 cosh^2 pi m) at lam = 3/2
        expect = (math.cosh(2 * math.pi) - 1) / (2 * math.cosh(math.pi) ** 2)
        assert signature_closed_form(P).entries[0, 0].real == pytest.approx(expect, abs=1e-14)

    def test_zero_lambda(self):
        S = signature_closed_form(ModeParams.closed(0.8, 0.0, allow_zero_lambda=True))
        np.testing.assert_allclose(S.entries, SIGMA3, atol=1e-15)

    def test_literal_printed_form_not_bounded(self):
        # the printed off-diagonal is twice the consistent one
        lit = signature_literal_printed(P)
        assert abs(lit[0, 1] - 2 * S12_REF) < 1e-13
        assert np.abs(np.linalg.eigvalsh(lit)).max() > 1.0

    @settings(max_examples=25)
    @given(masses, lambdas)
    def test_invariants(self, m, lam):
        p = ModeParams.closed(m, lam)
        S = signature_closed_form(p)
        assert S.hermiticity_defect() < 1e-12 and S.trace_defect() < 1e-12
        ev = S.eigenvalues()
        assert ev[1] == pytest.approx(-ev[0], abs=1e-12)
        assert 0 < ev[1] <= 1 + 1e-10
        Sm = signature_minus_closed_form(p)
        assert Sm.involution_defect() < 1e-12
        np.testing.assert_allclose(S.entries, 0.5 * (SIGMA3 + Sm.entries), atol=1e-14)

    @settings(max_examples=25)
    @given(masses, lambdas)
    def test_lambda_parity(self, m, lam):
        a = signature_closed_form(ModeParams.closed(m, lam)).entries
        b = signature_closed_form(ModeParams.closed(m, -lam)).entries
        assert abs(a[0, 0] - b[0, 0]) < 1e-12
        assert abs(a[0, 1] + b[0, 1]) < 1e-12

    def test_flat_mode_rejected(self):
        with pytest.raises(PreconditionError):
            signature_closed_form(ModeParams.flat_lambda(1.0, 1.0))


class TestSignatureMatrix:
    def test_validate_rejects(self):
        with pytest.raises(InvariantViolation):
            SignatureMatrix(np.array([[1, 1], [0, -1]]), S_TOTAL, P).validate()
        with pytest.raises(InvariantViolation):
            SignatureMatrix(np.diag([0.5, -0.5]), S_PLUS, P).validate()

    def test_bad_shape_and_kind(self):
        with pytest.raises(PreconditionError):
            SignatureMatrix(np.eye(3), S_TOTAL, P)
        with pytest.raises(PreconditionError):
            SignatureMatrix(np.eye(2), "other", P)


class TestNumeric:
    def test_against_closed_form(self):
        sp, sm, st_ = signature_numeric(P, 30.0)
        np.testing.assert_allclose(sp.entries, SIGMA3, atol=1e-8)
        assert sm.involution_defect() < 1e-8
        assert np.abs(st_.entries - signature_closed_form(P).entries).max() < 1e-6
        for S in (sp, sm, st_):
            assert S.hermiticity_defect() < 1e-10 and S.trace_defect() < 1e-10
        assert (sp.kind, sm.kind, st_.kind) == (S_PLUS, S_MINUS, S_TOTAL)

    @pytest.mark.parametrize("m,lam", [(0.25, -5.5), (4.0, 3.5)])
    def test_grid_corners(self, m, lam):
        p = ModeParams.closed(m, lam)
        _, _, S = signature_numeric(p, 30.0)
        assert np.abs(S.entries - signature_closed_form(p).entries).max() < 1e-6


class TestProjector:
    def test_sigma3(self):
        np.testing.assert_array_equal(project_negative(np.diag([1, -1])), np.diag([0, 1]))
        np.testing.assert_array_equal(project_negative(np.diag([-1, 1])), np.diag([1, 0]))

    def test_flat(self):
        S = signature_flat(ModeParams.flat_lambda(2.0, -1.0))
        assert S.kind == FLAT_HALF
        np.testing.assert_array_equal(S.eigenvalues(), [-0.5, 0.5])
        np.testing.assert_array_equal(project_negative(S), np.diag([0, 1]))

    def test_closed_form_eigenvector(self):
        S = signature_closed_form(P).entries
        Pn = project_negative(S)
        # independent 2x2 eigensolve: for [[a, b], [conj b, -a]] the negative
        # eigenvalue is -r with eigenvector (b, -(a + r))
        a, b = S[0, 0].real, S[0, 1]
        r = math.sqrt(a * a + abs(b) ** 2)
        v = np.array([b, -(a + r)])
        v /= np.linalg.norm(v)
        np.testing.assert_allclose(Pn, np.outer(v, v.conj()), atol=1e-14)

    def test_zero_eigenvalue_warns(self):
        with pytest.warns(DegenerateSpectrumError):
            Pn = project_negative(np.diag([0.0, -1.0]))
        np.testing.assert_array_equal(Pn, np.diag([0, 1]))

    def test_non_hermitian(self):
        with pytest.raises(PreconditionError):
            project_negative(np.array([[0, 1], [0, 0]]))

    @settings(max_examples=40)
    @given(masses, lambdas)
    def test_idempotent_and_commuting(self, m, lam):
        S = signature_closed_form(ModeParams.closed(m, lam)).entries
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            Pn = project_negative(S)
        assert np.abs(Pn @ Pn - Pn).max() < 1e-10
        assert np.abs(Pn - Pn.conj().T).max() < 1e-10
        assert np.abs(Pn @ S - S @ Pn).max() < 1e-10


class TestBoundaryTerm:
    def test_examples(self):
        assert boundary_term([1, 0], [1, 0]).value == 1
        assert boundary_term([1, 0], [0, 1]).value == 0

    @given(st.complex_numbers(max_magnitude=1e6), st.complex_numbers(max_magnitude=1e6))
    def test_diagonal_positive(self, a, b):
        v = boundary_term([a, b], [a, b]).value
        assert v.imag == 0 and v.real >= 0

    def test_mode_pairing(self):
        p, q = ModeParams.flat_lambda(1.0, 1.0), ModeParams.flat_lambda(1.2, 2.0)
        with pytest.raises(PreconditionError):
            boundary_term([1, 0], [1, 0], (p, q))


class TestMassIdentity:
    def test_pair(self):
        p = ModeParams.flat_lambda(1.0, 1.0)
        assert verify_mass_identity(p, 1.5, np.linspace(-5, 5, 11)).max_residual < 1e-7

    def test_equal_masses(self):
        p = ModeParams.flat_lambda(1.0, -2.0)
        rep = verify_mass_identity(p, 1.0, [-2.0, 0.0, 2.0])
        assert np.abs(rep.rhs).max() == 0 and rep.max_residual < 1e-7

    def test_decoupled(self):
        p = ModeParams.flat_lambda(1.0, 0.0)
        assert verify_mass_identity(p, 1.5, np.linspace(-5, 5, 11)).max_residual < 1e-12


class TestSmear:
    def test_zero_weight(self):
        res = mass_smear(1.0, (1, 2), [10.0], weight=lambda m: np.zeros_like(m))
        np.testing.assert_array_equal(res.values, 0)

    def test_bump_support(self):
        eta = bump((1.0, 2.0))
        assert eta(np.array([1.0, 2.0, 0.5]))[...].tolist() == [0, 0, 0]
        assert eta(np.array([1.5]))[0] == pytest.approx(math.exp(-1))

    @pytest.mark.parametrize("interval", [(1.0, 1.0), (0.0, 1.0), (2.0, 1.0)])
    def test_bad_interval(self, interval):
        with pytest.raises(PreconditionError):
            mass_smear(1.0, interval, [10.0])

    def test_weight_must_be_function(self):
        with pytest.raises(PreconditionError):
            mass_smear(1.0, (1, 2), [10.0], weight=1.0)

    def test_refinement_limit(self):
        with pytest.raises(QuadratureNotConverged):
            mass_smear(1.0, (1, 2), [80.0], n=4, n_max=8, tol=1e-14)

    def test_converged_result(self):
        res = mass_smear(1.0, (1, 2), [10.0, 20.0])
        assert res.quadrature_error < 1e-8 and res.n >= 64
