import numpy as np
import pytest

from itespec.linalg import (LUBreakdownError, arnoldi, band_factor, band_lu_dense_factors,
                            band_matvec, band_storage, band_to_dense, charpoly,
                            hessenberg_eigvals, hessenberg_reduce)


def random_banded(rng, n, kl, ku):
    dense = np.zeros((n, n), dtype=complex)
    for d in range(-ku, kl + 1):
        idx = np.arange(max(0, -d), min(n, n - d))
        dense[idx + d, idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    return dense


def match_error(a, b):
    a, b = list(a), list(b)
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(j)) / max(1.0, abs(x)))
    return worst


@pytest.mark.parametrize("seed", range(5))
def test_band_lu_reconstructs(seed):
    rng = np.random.default_rng(seed)
    n, kl, ku = 30, 6, 2
    dense = random_banded(rng, n, kl, ku)
    fac = band_factor(band_storage(dense, kl, ku), kl, ku)
    P, L, U = band_lu_dense_factors(fac)
    assert np.linalg.norm(L @ U - P @ dense) <= 1e-12 * np.linalg.norm(dense)
    b = rng.standard_normal(n) + 0j
    assert np.linalg.norm(dense @ fac.solve(b) - b) <= 1e-9 * np.linalg.norm(b)


def test_band_matvec_matches_dense(rng):
    dense = random_banded(rng, 25, 6, 2)
    x = rng.standard_normal(25) + 1j * rng.standard_normal(25)
    ab = band_storage(dense, 6, 2)
    assert np.allclose(band_matvec(ab, 6, 2, x), dense @ x)
    assert np.array_equal(band_to_dense(ab, 6, 2), dense)


def test_singular_band_matrix_breaks_down():
    dense = np.diag([1.0, 2.0, 0.0, 3.0]).astype(complex)
    with pytest.raises(LUBreakdownError):
        band_factor(band_storage(dense, 1, 1), 1, 1)


@pytest.mark.parametrize("seed", range(10))
def test_hessenberg_qr_against_charpoly(seed):
    rng = np.random.default_rng(100 + seed)
    M = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    H = hessenberg_reduce(M)
    assert np.allclose(np.tril(H, -2), 0, atol=1e-13)
    qr = hessenberg_eigvals(H)
    roots = np.roots(charpoly(M))
    assert match_error(qr, roots) <= 1e-9


def test_arnoldi_relation(rng):
    A = rng.standard_normal((40, 40)) + 0j
    V, H = arnoldi(lambda x: A @ x, rng.standard_normal(40) + 0j, 12)
    assert np.allclose(A @ V[:, :12], V @ H, atol=1e-10)
    assert np.allclose(V.conj().T @ V, np.eye(13), atol=1e-12)


def test_arnoldi_breakdown_on_invariant_subspace():
    A = np.diag(np.arange(1.0, 6.0)).astype(complex)
    v0 = np.zeros(5, dtype=complex)
    v0[:2] = 1
    V, H = arnoldi(lambda x: A @ x, v0, 4)
    assert V.shape[1] == 2 and H.shape == (2, 2)
    assert np.allclose(sorted(np.linalg.eigvals(H).real), [1, 2])
