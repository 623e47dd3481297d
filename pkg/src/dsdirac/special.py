"""Complex Gamma and Gauss hypergeometric functions on real 0 <= z < 1.

Everything here works on Python ``complex`` scalars.  Series are summed in
chunks (terms from a running product, sums with :func:`math.fsum`), which
keeps the long sums near ``z = 1`` accurate without a Python-level loop per
term.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import ConvergenceError, DegenerateConnectionError, PoleError, PreconditionError

__all__ = [
    "log_gamma",
    "gamma",
    "rgamma",
    "hyp2f1",
    "hyp2f1_series",
    "hyp2f1_regularized",
    "hyp2f1_near_one",
    "hyp2f1_derivative",
    "kahan_sum",
]

POLE_TOL = 1e-14
INTEGER_TOL = 1e-10
TERM_CAP = 1_000_000
TAIL_TOL = 1e-15

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


def _nearest_nonpositive_integer(z: complex, tol: float) -> int | None:
    z = complex(z)
    if abs(z.imag) > tol or z.real > tol:
        return None
    n = round(z.real)
    if abs(z.real - n) <= tol:
        return int(n)
    return None


def _is_integer(z: complex, tol: float = INTEGER_TOL) -> bool:
    z = complex(z)
    return abs(z.imag) <= tol and abs(z.real - round(z.real)) <= tol


def kahan_sum(values) -> complex:
    """Compensated sum of complex values (real and imaginary parts separately)."""
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _log_gamma_right(z: complex) -> complex:
    # Lanczos, valid for Re z >= 1/2
    z = z - 1.0
    x = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        x += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma (analytic off the negative real axis).

    Agrees with ``scipy.special.loggamma``.  Raises :class:`PoleError` at
    non-positive integers.
    """
    z = complex(z)
    if _nearest_nonpositive_integer(z, POLE_TOL) is not None:
        raise PoleError(f"log_gamma pole at z={z}")
    if z.real >= 0.5:
        return _log_gamma_right(z)
    # reflection; the floor term moves the result onto the principal branch
    val = _LOG_PI - cmath.log(cmath.sin(math.pi * z)) - _log_gamma_right(1.0 - z)
    if z.imag != 0.0:
        k = math.floor(0.5 * z.real + 0.25)
        val += 2j * math.pi * math.copysign(1.0, z.imag) * k
    return val


def gamma(z: complex) -> complex:
    return cmath.exp(log_gamma(z))


def rgamma(z: complex) -> complex:
    """1/Gamma(z), entire; exactly zero at the poles of Gamma."""
    if _nearest_nonpositive_integer(z, POLE_TOL) is not None:
        return 0j
    return cmath.exp(-log_gamma(z))


def _check_z(z: float) -> float:
    z = float(z)
    if not (0.0 <= z < 1.0):
        raise PreconditionError(f"z must lie in [0, 1), got {z!r}")
    return z


def _sum_series(a: complex, b: complex, c: complex, z: float, *,
                cap: int = TERM_CAP, tail_tol: float = TAIL_TOL) -> complex:
    """Sum the Gauss series term by term; c must not be a pole."""
    if z == 0.0:
        return 1.0 + 0j
    parts_re: list[float] = []
    parts_im: list[float] = []
    last = 1.0 + 0j
    parts_re.append(1.0)
    parts_im.append(0.0)
    n0 = 0
    chunk = 32
    while n0 < cap:
        n = np.arange(n0, min(n0 + chunk, cap), dtype=float)
        ratios = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        terms = last * np.cumprod(ratios)
        parts_re.append(math.fsum(terms.real))
        parts_im.append(math.fsum(terms.imag))
        last = complex(terms[-1])
        n0 += len(n)
        if last == 0:
            return complex(math.fsum(parts_re), math.fsum(parts_im))
        total = abs(complex(math.fsum(parts_re), math.fsum(parts_im)))
        r = abs(complex(ratios[-1]))
        # geometric tail bound once the terms are shrinking
        if r < 1.0:
            tail = abs(last) * r / (1.0 - r)
            if tail <= tail_tol * max(total, 1e-300):
                return complex(math.fsum(parts_re), math.fsum(parts_im))
        chunk = min(chunk * 2, 65536)
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; {z}) did not converge within {cap} terms"
    )


def hyp2f1_series(a: complex, b: complex, c: complex, z: float, *,
                  cap: int = TERM_CAP, tail_tol: float = TAIL_TOL) -> complex:
    """Direct power series of 2F1, compensated summation, for 0 <= z < 1."""
    z = _check_z(z)
    a, b, c = complex(a), complex(b), complex(c)
    if _nearest_nonpositive_integer(c, INTEGER_TOL) is not None:
        raise PoleError(f"c={c} is a non-positive integer")
    return _sum_series(a, b, c, z, cap=cap, tail_tol=tail_tol)


def _regularized_series(a: complex, b: complex, c: complex, z: float) -> complex:
    """F(a,b;c;z)/Gamma(c) by direct summation, including the c -> -n limit."""
    n = _nearest_nonpositive_integer(c, INTEGER_TOL)
    if n is None:
        return _sum_series(a, b, c, z) * rgamma(c)
    k = -n + 1
    if z == 0.0:
        return 0j
    # F/Gamma(c) at c = -n equals (a)_{n+1} (b)_{n+1} z^{n+1} F(a+n+1, b+n+1; n+2; z)/(n+1)!
    poch = 1.0 + 0j
    for j in range(k):
        poch *= (a + j) * (b + j)
    return poch * z**k * _sum_series(a + k, b + k, complex(k + 1), z) / math.factorial(k)


def _connection(a: complex, b: complex, c: complex, z: float, w: float) -> complex:
    """z -> 1 - z connection formula (DLMF 15.8.4), in regularized form.

    ``w`` is 1 - z supplied separately so callers can keep it accurate when
    z rounds to 1.
    """
    s = c - a - b
    if _is_integer(s):
        raise DegenerateConnectionError(
            f"c - a - b = {s} is an integer; the connection formula is singular"
        )
    first = rgamma(c - a) * rgamma(c - b) * _regularized_series(a, b, a + b - c + 1.0, w)
    second = (
        rgamma(a) * rgamma(b)
        * cmath.exp(s * math.log(w))
        * _regularized_series(c - a, c - b, s + 1.0, w)
    )
    return math.pi / cmath.sin(math.pi * s) * (first - second)


def _resolve_w(z: float, one_minus_z: float | None) -> float:
    if one_minus_z is None:
        return 1.0 - z
    w = float(one_minus_z)
    if not (0.0 < w <= 1.0):
        raise PreconditionError(f"one_minus_z must lie in (0, 1], got {w!r}")
    return w


def hyp2f1_near_one(a: complex, b: complex, c: complex, z: float, *,
                    one_minus_z: float | None = None) -> complex:
    """2F1 through the connection formula; intended for 0.5 < z < 1.

    ``one_minus_z`` may carry 1 - z at full relative precision; ``z`` itself is
    then allowed to round to 1.0.
    """
    a, b, c = complex(a), complex(b), complex(c)
    z = float(z)
    w = _resolve_w(z, one_minus_z)
    if one_minus_z is None:
        _check_z(z)
    if not (0.5 < z <= 1.0) or w >= 0.5:
        raise PreconditionError(f"hyp2f1_near_one needs 0.5 < z < 1, got z={z!r}")
    if _nearest_nonpositive_integer(c, INTEGER_TOL) is not None:
        raise PoleError(f"c={c} is a non-positive integer")
    return _connection(a, b, c, z, w) * gamma(c)


def hyp2f1(a: complex, b: complex, c: complex, z: float, *,
           one_minus_z: float | None = None) -> complex:
    """Gauss hypergeometric function for real 0 <= z < 1.

    Direct series for z <= 0.5 and whenever c - a - b is an integer; the
    connection formula otherwise.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if one_minus_z is None:
        z = _check_z(z)
    if _nearest_nonpositive_integer(c, INTEGER_TOL) is not None:
        raise PoleError(f"c={c} is a non-positive integer")
    if _terminates(a, b):
        # a polynomial; z = 1 is fine
        if not 0.0 <= float(z) <= 1.0:
            raise PreconditionError(f"z must lie in [0, 1], got {z!r}")
        return _sum_series(a, b, c, float(z))
    if z <= 0.5 or _is_integer(c - a - b):
        return _sum_series(a, b, c, _check_z(z))
    return hyp2f1_near_one(a, b, c, z, one_minus_z=one_minus_z)


def _terminates(a: complex, b: complex) -> bool:
    return (_nearest_nonpositive_integer(a, INTEGER_TOL) is not None
            or _nearest_nonpositive_integer(b, INTEGER_TOL) is not None)


def hyp2f1_regularized(a: complex, b: complex, c: complex, z: float, *,
                       one_minus_z: float | None = None) -> complex:
    """F(a,b;c;z)/Gamma(c), entire in c."""
    a, b, c = complex(a), complex(b), complex(c)
    if one_minus_z is None:
        z = _check_z(z)
    if _nearest_nonpositive_integer(c, INTEGER_TOL) is not None:
        return _regularized_series(a, b, c, _check_z(z))
    return hyp2f1(a, b, c, z, one_minus_z=one_minus_z) * rgamma(c)


def hyp2f1_derivative(a: complex, b: complex, c: complex, z: float, *,
                      one_minus_z: float | None = None) -> complex:
    """d/dz 2F1(a,b;c;z) = (ab/c) 2F1(a+1,b+1;c+1;z)."""
    a, b, c = complex(a), complex(b), complex(c)
    if _nearest_nonpositive_integer(c, INTEGER_TOL) is not None:
        raise PoleError(f"c={c} is a non-positive integer")
    return a * b / c * hyp2f1(a + 1.0, b + 1.0, c + 1.0, z, one_minus_z=one_minus_z)
