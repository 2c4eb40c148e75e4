import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itespec import specialfn as sf

FIRST_ZERO_J0 = 2.404825557695773


def _oracle(m, z, digits=25):
    return complex(sf.besselj_oracle(m, z, digits))


def test_values_at_origin():
    assert sf.besselj(0, 0) == 1
    assert sf.besselj(1, 0) == 0
    assert sf.besselj_prime(0, 0) == 0
    assert sf.besselj_prime(1, 0) == 0.5
    assert sf.besselj_prime(2, 0) == 0


def test_first_zero_of_j0():
    assert abs(sf.besselj(0, FIRST_ZERO_J0)) < 1e-15


def test_j0_on_imaginary_axis_is_real():
    v = sf.besselj(0, 10j)
    assert abs(v.imag) <= 1e-14 * abs(v)
    assert v.real == pytest.approx(float(mpmath.besseli(0, 10)), rel=1e-13)


def test_derivative_matches_finite_difference():
    z, h = 1 + 1j, 1e-5
    for m in (0, 1, 5):
        fd = (sf.besselj(m, z + h) - sf.besselj(m, z - h)) / (2 * h)
        assert abs(sf.besselj_prime(m, z) - fd) <= 1e-7 * abs(fd)


@pytest.mark.parametrize("z", [0.3 + 0.1j, 4.0 - 2.0j, 17.5 + 6.0j, -25.0 + 3.0j])
def test_derivative_recurrence(z):
    for m in (1, 2, 9, 30):
        lhs = 2 * sf.besselj_prime(m, z)
        rhs = sf.besselj(m - 1, z) - sf.besselj(m + 1, z)
        assert abs(lhs - rhs) <= 1e-11 * max(abs(lhs), abs(sf.besselj(m - 1, z)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 40), st.floats(-45, 45), st.floats(-12, 12))
def test_conjugation_and_parity(m, x, y):
    z = complex(x, y)
    if z == 0:
        return
    val = sf.besselj(m, z)
    assert sf.besselj(m, z.conjugate()) == pytest.approx(val.conjugate(), rel=1e-13, abs=1e-300)
    assert sf.besselj(m, -z) == pytest.approx((-1) ** m * val, rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("m,z", [(0, 0.05), (3, 2.5 + 1j), (13, 12.5 - 7j), (55, 31j),
                                 (80, 50.0), (8, -42 + 0.3j), (1, 20 + 20j)])
def test_against_oracle(m, z):
    ref = _oracle(m, z)
    assert abs(sf.besselj(m, z) - ref) <= 1e-10 * abs(ref)


def test_oracle_self_consistent():
    for m, z in [(0, 7.5 + 3j), (21, 40 - 10j), (80, 0.7)]:
        a = sf.besselj_oracle(m, z, digits=20)
        b = sf.besselj_oracle(m, z, digits=25)
        assert abs(complex(a) - complex(b)) <= 1e-19 * abs(complex(b))


def test_oracle_matches_mpmath():
    with mpmath.workdps(30):
        ref = complex(mpmath.besselj(7, mpmath.mpc(12, -5)))
    assert abs(_oracle(7, 12 - 5j) - ref) <= 1e-20 * abs(ref)


def test_scaled_values_are_finite_for_tiny_j():
    # J_80(0.05) underflows nothing in scaled form
    s0, s1 = sf.besselj_scaled(80, 0.05)
    assert s0 == pytest.approx(1.0, abs=1e-3)
    assert s1 == pytest.approx(1.0, abs=1e-3)


def test_bessel_eval_reports_method():
    ev = sf.bessel_eval(2, 1.5)
    assert ev.method == "series"
    assert ev.value == sf.besselj(2, 1.5)
    assert sf.bessel_eval(2, 300.0).method == "asymptotic"


@pytest.mark.parametrize("m", [-1, 301, 2.5])
def test_domain_errors_on_order(m):
    with pytest.raises(sf.BesselDomainError):
        sf.besselj(m, 1.0)


def test_domain_error_on_modulus():
    with pytest.raises(sf.BesselDomainError):
        sf.besselj(0, 501.0)


def test_overflow_error():
    with pytest.raises(sf.BesselOverflowError):
        sf.besselj(0, 800j)


def test_large_argument_asymptotics():
    z = 450.0
    ref = math.sqrt(2 / (math.pi * z)) * math.cos(z - math.pi / 4)
    assert sf.besselj(0, z).real == pytest.approx(ref, abs=2e-5)
    assert abs(sf.besselj(0, cmath.rect(300, 0.2))) > 0


@pytest.mark.parametrize("m,z", [(0, 3.0 + 1j), (5, 12.0 - 4j), (20, 35.0 + 2j), (60, 48j)])
def test_wronskian_type_identity(m, z):
    got = sf.besselj(m + 1, z) * sf.besselj_prime(m, z) - sf.besselj(m, z) * sf.besselj_prime(m + 1, z)
    j0, j1, j2 = (_oracle(m + i, z, 30) for i in range(3))
    # J'_m = (m/z) J_m - J_{m+1}
    d0 = m / z * j0 - j1
    d1 = (m + 1) / z * j1 - j2
    ref = j1 * d0 - j0 * d1
    assert abs(got - ref) <= 1e-9 * max(1.0, abs(ref))
