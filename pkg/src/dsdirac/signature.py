"""Per-mode fermionic signature matrices, spectral projection and boundary terms.

Matrix convention: ``entries[i, j]`` is the coefficient of the j-th basis
solution in S applied to the i-th one, the basis being (u+, u-) in closed
slicing and (u^{s,1}, u^{s,2}) in flat slicing.  Both bases are orthonormal,
so the matrices are Hermitian.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    FUTURE,
    INTEGRATED,
    PAST,
    flat_fundamental_values,
    extract_asymptotics,
)
from .closed_form import MINUS, PLUS, past_coefficient_gamma_ratio
from .errors import (
    DegenerateSpectrumError,
    DsDiracError,
    PreconditionError,
    QuadratureNotConverged,
)
from .modes import CLOSED, CLOSED_PHASE_STRIPPED, FLAT, ModeParams

__all__ = [
    "S_PLUS",
    "S_MINUS",
    "S_TOTAL",
    "FLAT_HALF",
    "SIGMA3",
    "InvariantViolation",
    "SignatureMatrix",
    "signature_closed_form",
    "signature_minus_closed_form",
    "signature_literal_printed",
    "signature_numeric",
    "signature_flat",
    "project_negative",
    "BoundaryTerm",
    "boundary_term",
    "MassIdentityReport",
    "verify_mass_identity",
    "bump",
    "SmearResult",
    "mass_smear",
    "smear_decay_exponent",
]

S_PLUS = "S_plus"
S_MINUS = "S_minus"
S_TOTAL = "S_total"
FLAT_HALF = "FlatHalf"
KINDS = (S_PLUS, S_MINUS, S_TOTAL, FLAT_HALF)

SIGMA3 = np.diag([1.0 + 0j, -1.0 + 0j])

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
INVOLUTION_TOL = 1e-8
SPECTRAL_CUT = 1e-10


class InvariantViolation(DsDiracError, ArithmeticError):
    """A constructed matrix fails one of its structural invariants."""


@dataclass(frozen=True)
class SignatureMatrix:
    entries: np.ndarray
    kind: str
    mode: ModeParams

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (2, 2):
            raise PreconditionError("a signature matrix is 2x2")
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown kind {self.kind!r}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def trace_defect(self) -> float:
        return float(abs(np.trace(self.entries)))

    def involution_defect(self) -> float:
        return float(np.abs(self.entries @ self.entries - np.eye(2)).max())

    def eigenvalues(self) -> np.ndarray:
        """Ascending real eigenvalues of the Hermitian part."""
        h = 0.5 * (self.entries + self.entries.conj().T)
        return np.linalg.eigvalsh(h)

    def invariants(self) -> dict[str, tuple[float, float]]:
        """Measured deviation and tolerance for each structural invariant."""
        out = {
            "hermiticity": (self.hermiticity_defect(), HERMITIAN_TOL),
            "trace": (self.trace_defect(), TRACE_TOL),
        }
        if self.kind in (S_PLUS, S_MINUS):
            out["involution"] = (self.involution_defect(), INVOLUTION_TOL)
        return out

    def validate(self) -> "SignatureMatrix":
        for name, (dev, tol) in self.invariants().items():
            if not dev <= tol:
                raise InvariantViolation(f"{self.kind}: {name} deviation {dev:.3e} > {tol:.0e}")
        return self


def _require(p: ModeParams, slicing: str) -> None:
    if p.slicing != slicing:
        raise PreconditionError(f"{slicing}-slicing mode required")


def _off_diagonal(m: float, lam: float) -> complex:
    # pi i Gamma(1/2+im) sin(pi lam) / (cosh^2(pi m) Gamma(1/2-im) Gamma(1/2+im+lam) Gamma(1/2+im-lam))
    return 1j * math.sin(math.pi * lam) / math.cosh(math.pi * m) * past_coefficient_gamma_ratio(m, lam)


def _diag_total(m: float, lam: float) -> float:
    # (cos 2 pi lam + cosh 2 pi m)/(2 cosh^2 pi m), written without overflow
    return 1.0 - (math.sin(math.pi * lam) / math.cosh(math.pi * m)) ** 2


def signature_closed_form(p: ModeParams) -> SignatureMatrix:
    """Exact S_m = (S_m^+ + S_m^-)/2 of a closed-slicing mode.

    The lower off-diagonal entry is evaluated from its own Gamma expression
    (with m -> -m), so Hermiticity is a genuine check rather than a
    construction.
    """
    _require(p, CLOSED)
    d = _diag_total(p.m, p.lam)
    e12 = _off_diagonal(p.m, p.lam)
    e21 = -_off_diagonal(-p.m, p.lam)
    return SignatureMatrix(np.array([[d, e12], [e21, -d]]), S_TOTAL, p).validate()


def signature_minus_closed_form(p: ModeParams) -> SignatureMatrix:
    """Exact S_m^-, which flips the second coefficient at T -> -infinity."""
    _require(p, CLOSED)
    d = 1.0 - 2.0 * (math.sin(math.pi * p.lam) / math.cosh(math.pi * p.m)) ** 2
    e12 = 2.0 * _off_diagonal(p.m, p.lam)
    e21 = -2.0 * _off_diagonal(-p.m, p.lam)
    return SignatureMatrix(np.array([[d, e12], [e21, -d]]), S_MINUS, p).validate()


def signature_literal_printed(p: ModeParams) -> np.ndarray:
    """The closed-form total with off-diagonal entries equal to those of S_m^-.

    This variant is not (S^+ + S^-)/2 and can have eigenvalues above 1; it is
    kept only so reports can quantify how far it sits from the exact matrix.
    """
    _require(p, CLOSED)
    d = _diag_total(p.m, p.lam)
    e12 = 2.0 * _off_diagonal(p.m, p.lam)
    return np.array([[d, e12], [np.conj(e12), -d]])


def _flip_matrix(F: np.ndarray) -> np.ndarray:
    # F columns: coefficients of the basis solutions; flipping the second
    # coefficient is sigma3 in those coordinates.  Row convention = transpose.
    return (np.linalg.solve(F, SIGMA3 @ F)).T


def signature_numeric(p: ModeParams, T_extract: float = 30.0, *,
                      rel_tol: float = 1e-10, abs_tol: float = 1e-12,
                      system: str = CLOSED_PHASE_STRIPPED,
                      tol: float = 1e-8) -> tuple[SignatureMatrix, SignatureMatrix, SignatureMatrix]:
    """(S^+, S^-, S_total) from the integrated fundamental solutions.

    Each of u+ and u- is evolved from its future plane-wave data and its
    asymptotic coefficients are extracted at T = +-T_extract.
    """
    _require(p, CLOSED)
    T = abs(float(T_extract))
    if T == 0:
        raise PreconditionError("T_extract must be nonzero")
    cols = {}
    for branch in (PLUS, MINUS):
        fut = extract_asymptotics(INTEGRATED, p, T, FUTURE, branch=branch, tol=tol,
                                  system=system, rel_tol=rel_tol, abs_tol=abs_tol)
        past = extract_asymptotics(INTEGRATED, p, -T, PAST, branch=branch, tol=tol,
                                   system=system, rel_tol=rel_tol, abs_tol=abs_tol)
        cols[branch] = (fut.f_plus, past.f_minus)
    F_future = np.column_stack([cols[PLUS][0], cols[MINUS][0]])
    F_past = np.column_stack([cols[PLUS][1], cols[MINUS][1]])
    s_plus = SignatureMatrix(_flip_matrix(F_future), S_PLUS, p)
    s_minus = SignatureMatrix(_flip_matrix(F_past), S_MINUS, p)
    s_total = SignatureMatrix(0.5 * (s_plus.entries + s_minus.entries), S_TOTAL, p)
    return s_plus, s_minus, s_total


def signature_flat(p: ModeParams) -> SignatureMatrix:
    """S_m = diag(1/2, -1/2) in the basis (u^{s,1}, u^{s,2})."""
    _require(p, FLAT)
    return SignatureMatrix(np.diag([0.5, -0.5]), FLAT_HALF, p)


def project_negative(S: SignatureMatrix | np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the eigenvectors with eigenvalue < 0.

    Eigenvalues within 1e-10 of zero are left out and reported through a
    :class:`DegenerateSpectrumError` warning.
    """
    e = S.entries if isinstance(S, SignatureMatrix) else np.asarray(S, dtype=complex)
    if np.abs(e - e.conj().T).max() > 1e-8:
        raise PreconditionError("project_negative needs a Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (e + e.conj().T))
    if np.any(np.abs(w) <= SPECTRAL_CUT):
        warnings.warn(DegenerateSpectrumError(f"eigenvalue on the spectral cut: {w}"),
                      stacklevel=2)
    P = np.zeros((2, 2), dtype=complex)
    for lam_i, vec in zip(w, v.T):
        if lam_i < -SPECTRAL_CUT:
            P += np.outer(vec, vec.conj())
    return P


# ------------------------------------------------------------ boundary


@dataclass(frozen=True)
class BoundaryTerm:
    value: complex
    modes: tuple[ModeParams, ModeParams] | None = None

    def __post_init__(self):
        if self.modes is not None:
            a, b = self.modes
            if abs(a.lam - b.lam) > 1e-12:
                raise PreconditionError("boundary terms pair modes with equal lambda")


def boundary_term(g, g_tilde, modes: tuple[ModeParams, ModeParams] | None = None) -> BoundaryTerm:
    """conj(g1) g~1 + conj(g2) g~2 for two sets of past-boundary coefficients."""
    g = np.asarray(g, dtype=complex)
    gt = np.asarray(g_tilde, dtype=complex)
    if g.shape != (2,) or gt.shape != (2,):
        raise PreconditionError("boundary coefficients are 2-vectors")
    if g is gt or np.array_equal(g, gt):
        value = complex(float(np.sum(np.abs(g) ** 2)), 0.0)
    else:
        value = complex(np.vdot(g, gt))
    return BoundaryTerm(value, modes)


@dataclass(frozen=True)
class MassIdentityReport:
    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0


def _fd_step(p: ModeParams, m_prime: float, t: float) -> float:
    # about 2000 points per period of the fastest local oscillation
    return 0.003 / (abs(p.lam) * math.exp(-t) + max(p.m, m_prime))


def verify_mass_identity(p: ModeParams, m_prime: float, t_grid, *, branch: str = PLUS,
                         rel_tol: float = 1e-12, abs_tol: float = 1e-14) -> MassIdentityReport:
    """Check d/dt <u(m), u(m')> = i (m - m') <u(m), sigma3 u(m')> on ``t_grid``.

    Both solutions are the fundamental solution ``branch`` for masses m and
    m'.  The left side uses fourth-order central differences.
    """
    _require(p, FLAT)
    t_grid = np.asarray(t_grid, dtype=float)
    pq = p.with_mass(m_prime)
    offsets = (-2, -1, 1, 2)
    pts = [float(t) for t in t_grid]
    for t in t_grid:
        h = _fd_step(p, m_prime, t)
        pts.extend(float(t + k * h) for k in offsets)
    u = flat_fundamental_values(p, pts, branch=branch, rel_tol=rel_tol, abs_tol=abs_tol)
    v = flat_fundamental_values(pq, pts, branch=branch, rel_tol=rel_tol, abs_tol=abs_tol)
    inner = np.einsum("ij,ij->i", u.conj(), v)
    n = len(t_grid)
    lhs = np.empty(n, dtype=complex)
    for i, t in enumerate(t_grid):
        h = _fd_step(p, m_prime, t)
        fm2, fm1, fp1, fp2 = inner[n + 4 * i: n + 4 * i + 4]
        lhs[i] = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    rhs = 1j * (p.m - m_prime) * np.einsum("ij,ij->i", u[:n].conj(), v[:n] * [1, -1])
    return MassIdentityReport(t_grid, lhs, rhs, np.abs(lhs - rhs))


# ------------------------------------------------------- mass smearing


def bump(interval: tuple[float, float]):
    """The smooth bump exp(-1/(1-y^2)) on ``interval``, y mapped to (-1, 1)."""
    a, b = interval

    def eta(m):
        m = np.asarray(m, dtype=float)
        y = (2.0 * m - (a + b)) / (b - a)
        out = np.zeros_like(y)
        inside = np.abs(y) < 1
        out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
        return out

    return eta


@dataclass(frozen=True)
class SmearResult:
    times: np.ndarray
    values: np.ndarray
    quadrature_error: float
    n: int

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)


def _smear_once(lam: float, interval, weight, times, n, branch, rel_tol, abs_tol):
    a, b = interval
    x, w = np.polynomial.legendre.leggauss(n)
    masses = 0.5 * (b - a) * x + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w * np.asarray(weight(masses), dtype=float)
    total = np.zeros((len(times), 2), dtype=complex)
    for m_i, w_i in zip(masses, weights):
        if w_i == 0.0:
            continue
        q = ModeParams.flat_lambda(float(m_i), lam)
        total += w_i * flat_fundamental_values(q, times, branch=branch,
                                               rel_tol=rel_tol, abs_tol=abs_tol)
    return total


def mass_smear(lam: float, interval: tuple[float, float], times, weight=None, *,
               n: int = 32, n_max: int = 1024, tol: float = 1e-8, branch: str = PLUS,
               rel_tol: float = 1e-11, abs_tol: float = 1e-14) -> SmearResult:
    """Gauss-Legendre approximation of int_I eta(m) u(m, t) dm at each t.

    ``weight`` defaults to :func:`bump` on the interval.  Starting from n
    nodes, the rule is doubled until the n and 2n results agree to ``tol``;
    :class:`QuadratureNotConverged` is raised if that needs more than
    ``n_max`` nodes.
    """
    a, b = (float(x) for x in interval)
    if not (0 < a < b):
        raise PreconditionError(f"mass interval must satisfy 0 < m_L < m_R, got {interval}")
    if weight is None:
        weight = bump((a, b))
    if not callable(weight):
        raise PreconditionError("weight must be a function of the mass")
    if n < 2:
        raise PreconditionError("n must be at least 2")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    coarse = _smear_once(lam, (a, b), weight, times, n, branch, rel_tol, abs_tol)
    while True:
        fine = _smear_once(lam, (a, b), weight, times, 2 * n, branch, rel_tol, abs_tol)
        err = float(np.abs(fine - coarse).max()) if len(times) else 0.0
        if err <= tol:
            return SmearResult(times, fine, err, 2 * n)
        if 2 * n >= n_max:
            raise QuadratureNotConverged(
                f"n={n} and n={2 * n} rules differ by {err:.3e} > {tol:.0e}"
            )
        n, coarse = 2 * n, fine


def smear_decay_exponent(lam: float, interval: tuple[float, float],
                         times=(10.0, 20.0, 40.0, 80.0), weight=None,
                         **kwargs) -> tuple[float, SmearResult]:
    """Least-squares slope of log||smeared u(t)|| against log t."""
    res = mass_smear(lam, interval, times, weight, **kwargs)
    norms = res.norms()
    if np.any(norms <= 0):
        raise PreconditionError("smeared amplitude vanishes; no decay rate to fit")
    slope = float(np.polyfit(np.log(res.times), np.log(norms), 1)[0])
    return slope, res

