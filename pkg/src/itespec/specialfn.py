"""Bessel functions J_m of integer order and complex argument.

The production path goes through :func:`itespec.kernels.jhat`, which returns
the scaled function ``J^_m(z) = J_m(z) * m! / (z/2)^m``. The scaled form is
even, entire and never underflows at high order, so the dispersion code works
with it directly. This module adds the unscaled values, the recurrence-based
derivative, and an extended-precision series oracle for the tests.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from itespec import kernels

MAX_ORDER = 300
MAX_MODULUS = 500.0
ORACLE_MAX_MODULUS = 60.0
ORACLE_MAX_DIGITS = 30
_LOG_HUGE = 700.0


class BesselDomainError(ValueError):
    """Order or argument outside the supported range."""


class BesselOverflowError(OverflowError):
    """The result magnitude would not be representable as a double."""


class OracleConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class BesselEval:
    order: int
    argument: complex
    value: complex
    derivative: complex
    method: str


def _check(m, z):
    if not isinstance(m, (int, np.integer)) or m < 0 or m > MAX_ORDER:
        raise BesselDomainError(f"order must be an integer in [0, {MAX_ORDER}], got {m!r}")
    z = complex(z)
    if abs(z.imag) > _LOG_HUGE:
        raise BesselOverflowError(f"|Im z| = {abs(z.imag):g} overflows double range")
    if abs(z) > MAX_MODULUS:
        raise BesselDomainError(f"|z| = {abs(z):g} exceeds {MAX_MODULUS:g}")
    return int(m), z


def _canonical(z):
    """Map z into the closed first quadrant; return (zc, negated, conjugated)."""
    neg = z.real < 0
    if neg:
        z = -z
    conj = z.imag < 0
    if conj:
        z = z.conjugate()
    return z, neg, conj


def _power_factor(j, z):
    # (z/2)^j / j! for z in the first quadrant, z != 0
    log_f = j * cmath.log(0.5 * z) - math.lgamma(j + 1)
    if log_f.real > _LOG_HUGE:
        raise BesselOverflowError("power factor overflows")
    return cmath.exp(log_f)


def _finish(val, sign_flip, conj):
    if sign_flip:
        val = -val
    if conj:
        val = val.conjugate()
    return val


def besselj_scaled(m: int, z: complex) -> tuple[complex, complex]:
    """Return ``(J^_m(z), J^_{m+1}(z))``; see module docstring."""
    m, z = _check(m, z)
    s0, s1, _ = kernels.jhat(m, np.array([z]))
    return complex(s0[0]), complex(s1[0])


def besselj(m: int, z: complex) -> complex:
    """J_m(z) for integer ``0 <= m <= 300`` and ``|z| <= 500``."""
    m, z = _check(m, z)
    if z == 0:
        return 1.0 + 0j if m == 0 else 0j
    zc, neg, conj = _canonical(z)
    s0, _, _ = kernels.jhat(m, np.array([zc]))
    val = complex(s0[0]) * _power_factor(m, zc)
    return _finish(val, neg and m % 2 == 1, conj)


def besselj_prime(m: int, z: complex) -> complex:
    """J'_m(z) from the recurrence ``J'_m = (m/z) J_m - J_{m+1}``.

    The m/z term is folded into the power factor so the formula stays finite
    at the origin.
    """
    m, z = _check(m, z)
    if z == 0:
        return 0.5 + 0j if m == 1 else 0j
    zc, neg, conj = _canonical(z)
    s0, s1, _ = kernels.jhat(m, np.array([zc]))
    s0, s1 = complex(s0[0]), complex(s1[0])
    val = -_power_factor(m + 1, zc) * s1
    if m >= 1:
        val += 0.5 * _power_factor(m - 1, zc) * s0
    # J'_m has parity (-1)^(m+1)
    return _finish(val, neg and m % 2 == 0, conj)


def bessel_eval(m: int, z: complex) -> BesselEval:
    m, z = _check(m, z)
    zc = _canonical(z)[0]
    method = kernels.METHOD_NAMES[kernels.select_method(m, abs(zc))]
    return BesselEval(m, z, besselj(m, z), besselj_prime(m, z), method)


def _oracle_series(m, z, dps, limit):
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z.real, z.imag)
        q = -(zz * zz) / 4
        term = (zz / 2) ** m / mpmath.factorial(m)
        total = term
        eps = mpmath.mpf(10) ** (-dps)
        for k in range(1, limit + 1):
            term = term * q / (k * (m + k))
            total += term
            # stop only once terms are shrinking and negligible relative to the sum
            if abs(q) < k * (m + k) and abs(term) <= eps * abs(total):
                return total
    raise OracleConvergenceError(f"series for J_{m}({z}) did not converge in {limit} terms")


def besselj_oracle(m: int, z: complex, digits: int = 20) -> mpmath.mpc:
    """Ascending power series of J_m(z) summed in extended precision.

    Test-only ground truth. The working precision starts at ``digits`` plus
    enough guard digits to absorb the cancellation of terms as large as
    ``e^|z|`` and is raised until two successive sums agree.

    Raises
    ------
    OracleConvergenceError
        If the series needs more than ``10|z| + 50`` terms or the sums at
        increasing precision keep disagreeing.
    """
    if m < 0 or int(m) != m:
        raise BesselDomainError("order must be a nonnegative integer")
    if abs(z) > ORACLE_MAX_MODULUS or digits > ORACLE_MAX_DIGITS:
        raise BesselDomainError("oracle supports |z| <= 60 and digits <= 30")
    z = complex(z)
    m = int(m)
    limit = int(10 * abs(z)) + 50
    dps = digits + int(abs(z) / math.log(10)) + 10
    prev = _oracle_series(m, z, dps, limit)
    for _ in range(8):
        dps += 20
        cur = _oracle_series(m, z, dps, limit)
        with mpmath.workdps(dps):
            if cur == 0 or abs(cur - prev) <= mpmath.mpf(10) ** (-(digits + 2)) * abs(cur):
                break
        prev = cur
    else:
        raise OracleConvergenceError(f"oracle for J_{m}({z}) unstable in precision")
    with mpmath.workdps(digits):
        return +cur
