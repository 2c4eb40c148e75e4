import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itespec import kernels
from itespec.dispersion import (MIN_STEPS, RefractionIndex, det_constant, dispersion_fn,
                                parse_index, radial_shoot, real_roots_bisect,
                                reduced_to_textbook, shooting_fn)
from itespec.errors import DegenerateIndexError, HypothesisViolation, InvalidIndexError

ORACLE_MATRIX = [2, 4, 16, 0.5, 4 + 1j]
K_GRID = np.array([x + 1j * y for x in np.linspace(0.5, 20, 10) for y in np.linspace(-5, 5, 10)])


def _term_scale(m, k, n0):
    # magnitude of the two products making up the reduced determinant
    jk0, jk1, _ = kernels.jhat(m, k)
    kp0, kp1, _ = kernels.jhat(m, np.sqrt(k * k * n0))
    return np.abs(jk1 * kp0) + np.abs(n0 * kp1 * jk0)


def test_parse_roundtrip():
    for text in ("const:4", "const:4,1", "radial:3,1", "absorbing:4,1"):
        idx = parse_index(text)
        assert parse_index(idx.spec_string()) == idx


@pytest.mark.parametrize("text", ["const:", "const:a", "radial:", "absorbing:1", "weird:1"])
def test_parse_rejects_garbage(text):
    with pytest.raises(InvalidIndexError):
        parse_index(text)


@pytest.mark.parametrize("text", ["const:1", "radial:1", "radial:1,0,0", "absorbing:1,0"])
def test_degenerate_indices(text):
    with pytest.raises(DegenerateIndexError):
        parse_index(text)


def test_vanishing_index_rejected():
    with pytest.raises(InvalidIndexError):
        parse_index("radial:-1,3")


def test_weyl_hypothesis_needs_positive_real_part():
    RefractionIndex.constant(4).validate(weyl=True)
    with pytest.raises(HypothesisViolation):
        RefractionIndex.constant(-2).validate(weyl=True)


def test_det_constant_degenerate_and_even():
    with pytest.raises(DegenerateIndexError):
        det_constant(0, 2.0, 1.0)
    k = 3.3 + 0.4j
    assert det_constant(0, k, 4) == pytest.approx(det_constant(0, -k, 4), rel=1e-12)


def test_det_constant_first_real_root_from_bisection():
    f = lambda k: np.array([det_constant(0, complex(x), 4) for x in np.atleast_1d(k)])  # noqa: E731
    roots = real_roots_bisect(f, 0.5, 10.0, n_grid=400, tol=1e-13)
    k_star = roots[0]
    scale = abs(det_constant(0, k_star + 0.1, 4))
    assert abs(det_constant(0, k_star, 4)) <= 1e-10 * scale
    # the reduced determinant vanishes at the same place
    red = dispersion_fn(RefractionIndex.constant(4), 0)
    assert abs(red(k_star)) <= 1e-10 * abs(red(k_star + 0.1))


def test_reduced_matches_textbook_scaling(rng):
    idx = RefractionIndex.constant(4)
    for m in (0, 2, 5):
        f = dispersion_fn(idx, m)
        for k in rng.uniform(1, 15, 5) + 1j * rng.uniform(-2, 2, 5):
            ref = det_constant(m, k, 4)
            got = complex(reduced_to_textbook(m, k, 4, f(k)))
            assert abs(got - ref) <= 1e-9 * abs(ref)


@pytest.mark.parametrize("n0", ORACLE_MATRIX)
def test_shooting_matches_closed_form(n0):
    idx = RefractionIndex.constant(n0)
    for m in (0, 1, 4):
        closed = dispersion_fn(idx, m)(K_GRID)
        shot = shooting_fn(idx, m, 8192)(K_GRID)
        rel = np.abs(shot - closed) / _term_scale(m, K_GRID, n0)
        assert np.max(rel) <= 1e-7


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([4.0, 16.0, 0.5, 4 + 1j]), st.integers(0, 12),
       st.floats(0.2, 30), st.floats(-6, 6))
def test_evenness(n0, m, x, y):
    f = dispersion_fn(RefractionIndex.constant(n0), m)
    k = complex(x, y)
    a, b = f(k), f(-k)
    assert abs(a - b) <= 1e-10 * max(abs(a), 1e-300)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["const:4", "const:0.5", "radial:3,1"]), st.integers(0, 8),
       st.floats(0.2, 25), st.floats(-5, 5))
def test_conjugation_symmetry_for_real_indices(text, m, x, y):
    f = dispersion_fn(parse_index(text), m, k_max=30)
    k = complex(x, y)
    a, b = f(k), f(k.conjugate())
    assert abs(b - a.conjugate()) <= 1e-10 * max(abs(a), 1e-300)


def test_absorbing_has_no_conjugation_symmetry():
    f = dispersion_fn(parse_index("absorbing:4,1"), 0)
    k = 3 + 0.7j
    assert abs(f(k.conjugate()) - f(k).conjugate()) > 1e-3 * abs(f(k))
    # it has the reflection k -> -conj(k) instead (k D is odd under it)
    assert f(-k.conjugate()) == pytest.approx(-f(k).conjugate(), rel=1e-12)


def test_shoot_identical_profiles_give_zero():
    idx = RefractionIndex.radial([1.0, 0.0])
    w, dw, v, dv = radial_shoot(0, 1.0, idx, 512)
    assert abs(v * dw - w * dv)[0] <= 1e-12


@pytest.mark.parametrize("k", [1.0, 3 + 0.5j, 7 - 1j])
def test_fourth_order_self_convergence(k):
    idx = parse_index("radial:3,1")
    d = {}
    for n in (256, 512, 1024):
        w, dw, v, dv = radial_shoot(0, k, idx, n)
        d[n] = (v * dw - w * dv)[0]
    ratio = abs(d[256] - d[512]) / abs(d[512] - d[1024])
    assert 10 <= ratio <= 22


def test_radial_evaluator_step_consistency():
    idx = parse_index("radial:3,1")
    a = dispersion_fn(idx, 0, n_steps=512)
    b = dispersion_fn(idx, 0, n_steps=1024)
    for k in (1.0, 3 + 0.5j, 6 - 0.5j):
        assert abs(a(k) - b(k)) <= 1e-7 * abs(b(k))


def test_shoot_argument_checks():
    idx = parse_index("radial:3,1")
    with pytest.raises(ValueError):
        radial_shoot(0, 1.0, idx, MIN_STEPS - 1)
    with pytest.raises(ValueError):
        radial_shoot(0, 0.0, idx)
    with pytest.raises(ValueError):
        radial_shoot(0, 1.0, RefractionIndex.constant(4))


def test_shoot_overflow_is_reported():
    with pytest.raises(OverflowError):
        radial_shoot(0, 400j, parse_index("radial:3,1"), 512)


def test_evaluator_path_and_array_calls():
    f = dispersion_fn(parse_index("radial:3,1"), 2, k_max=60)
    assert f.path == "shooting" and f.n_steps >= 512
    g = dispersion_fn(parse_index("radial:4"), 2)
    assert g.path == "bessel"
    ks = np.array([[1 + 1j, 2.0], [3.0, 4 - 1j]])
    out = f(ks)
    assert out.shape == ks.shape
    assert out[1, 0] == pytest.approx(f(3.0), rel=1e-14)


def test_cauchy_riemann_spot_check():
    f = dispersion_fn(parse_index("const:4"), 3)
    k, h = 5.5 + 0.8j, 1e-6
    dx = (f(k + h) - f(k - h)) / (2 * h)
    dy = (f(k + 1j * h) - f(k - 1j * h)) / (2j * h)
    assert abs(dx - dy) <= 1e-6 * abs(dx)
