import numpy as np
import pytest

from itespec import _pykernels, kernels
from itespec.linalg import band_storage, band_to_dense


def test_backend_selection_reports_a_known_name():
    assert kernels.BACKEND in kernels.backends()


def test_compiled_and_python_jhat_agree(rng):
    backs = kernels.backends()
    if len(backs) < 2:
        pytest.skip("compiled extension not built")
    z = rng.uniform(-40, 40, 300) + 1j * rng.uniform(-20, 20, 300)
    for m in (0, 1, 4, 17, 60):
        a0, a1, am = backs["python"].jhat(m, z)
        b0, b1, bm = backs["compiled"].jhat(m, z)
        assert np.allclose(a0, b0, rtol=1e-12, atol=0)
        assert np.allclose(a1, b1, rtol=1e-12, atol=0)
        assert np.array_equal(np.asarray(am), np.asarray(bm))


def test_compiled_and_python_shoot_agree(rng):
    backs = kernels.backends()
    if len(backs) < 2:
        pytest.skip("compiled extension not built")
    k = rng.uniform(0.5, 15, 20) + 1j * rng.uniform(-2, 2, 20)
    coef = np.column_stack([3 * k * k, k * k])
    for m in (0, 2, 7):
        ya, da = backs["python"].shoot(m, coef, 1e-3, 256)
        yb, db = backs["compiled"].shoot(m, coef, 1e-3, 256)
        assert np.allclose(ya, yb, rtol=1e-11)
        assert np.allclose(da, db, rtol=1e-11)


def test_method_selection_regions():
    assert kernels.METHOD_NAMES[kernels.select_method(0, 1.0)] == "series"
    assert kernels.METHOD_NAMES[kernels.select_method(3, 30.0)] == "recurrence"
    assert kernels.METHOD_NAMES[kernels.select_method(3, 200.0)] == "asymptotic"


def test_band_lu_solves(backend, rng):
    n, kl, ku = 40, 3, 2
    dense = np.zeros((n, n), dtype=complex)
    for d in range(-ku, kl + 1):
        idx = np.arange(max(0, -d), min(n, n - d))
        dense[idx + d, idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    ab = band_storage(dense, kl, ku)
    assert np.array_equal(band_to_dense(ab, kl, ku), dense)
    lu, piv = backend.band_lu(ab, kl, ku)
    b = rng.standard_normal(n) + 0j
    x = backend.band_solve(lu, piv, kl, ku, b)
    assert np.linalg.norm(dense @ x - b) <= 1e-10 * np.linalg.norm(b) * np.linalg.cond(dense)


def test_python_kernel_is_importable_standalone():
    s0, s1, _ = _pykernels.jhat(0, np.array([0j]))
    assert s0[0] == 1 and s1[0] == 1
