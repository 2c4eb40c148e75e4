"""Small linear-algebra toolkit for the finite-difference pencil.

Banded storage follows LAPACK ``gbtrf``: a matrix with ``kl`` sub- and
``ku`` super-diagonals is held in an array with ``2*kl + ku + 1`` rows and
``A[i, j]`` at ``ab[kl + ku + i - j, j]``; the top ``kl`` rows are fill-in
workspace for the pivoted factorisation.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from itespec import kernels


class LUBreakdownError(ArithmeticError):
    """A pivot is negligible relative to the matrix scale."""


class ArnoldiStagnationError(ArithmeticError):
    pass


class QRConvergenceError(ArithmeticError):
    pass


def band_storage(dense: np.ndarray, kl: int, ku: int) -> np.ndarray:
    n = dense.shape[0]
    ab = np.zeros((2 * kl + ku + 1, n), dtype=complex)
    for j in range(n):
        for i in range(max(0, j - ku), min(n, j + kl + 1)):
            ab[kl + ku + i - j, j] = dense[i, j]
    return ab


def band_to_dense(ab: np.ndarray, kl: int, ku: int) -> np.ndarray:
    n = ab.shape[1]
    out = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for i in range(max(0, j - ku), min(n, j + kl + 1)):
            out[i, j] = ab[kl + ku + i - j, j]
    return out


def band_matvec(ab: np.ndarray, kl: int, ku: int, x: np.ndarray) -> np.ndarray:
    n = ab.shape[1]
    y = np.zeros(n, dtype=complex)
    for d in range(-ku, kl + 1):
        # diagonal i - j = d
        row = kl + ku + d
        if d >= 0:
            y[d:] += ab[row, :n - d] * x[:n - d]
        else:
            y[:n + d] += ab[row, -d:] * x[-d:]
    return y


@dataclass
class BandLU:
    lu: np.ndarray
    piv: np.ndarray
    kl: int
    ku: int

    def solve(self, b):
        return kernels.band_solve(self.lu, self.piv, self.kl, self.ku, np.asarray(b, dtype=complex))

    @property
    def pivots(self) -> np.ndarray:
        return self.lu[self.kl + self.ku]


def band_factor(ab: np.ndarray, kl: int, ku: int, rel_floor: float = 1e-14) -> BandLU:
    """Pivoted band LU; raises :class:`LUBreakdownError` on a negligible pivot."""
    scale = float(np.max(np.abs(ab))) or 1.0
    try:
        lu, piv = kernels.band_lu(ab, kl, ku)
    except ZeroDivisionError as exc:
        raise LUBreakdownError(str(exc)) from exc
    fac = BandLU(lu, piv, kl, ku)
    if np.min(np.abs(fac.pivots)) < rel_floor * scale:
        raise LUBreakdownError("pivot below 1e-14 of the matrix scale")
    return fac


def band_lu_dense_factors(fac: BandLU):
    """Dense ``(P, L, U)`` with ``P A = L U``; for testing the band kernel."""
    n = fac.lu.shape[1]
    kl, ku = fac.kl, fac.ku
    kv = kl + ku
    U = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for i in range(max(0, j - kv), j + 1):
            U[i, j] = fac.lu[kv + i - j, j]
    # replay the row interchanges on the unit-lower multipliers
    L = np.eye(n, dtype=complex)
    perm = np.arange(n)
    for j in range(n):
        p = int(fac.piv[j])
        if p != j:
            perm[[j, p]] = perm[[p, j]]
            L[[j, p], :j] = L[[p, j], :j]
        km = min(kl, n - 1 - j)
        L[j + 1:j + 1 + km, j] = fac.lu[kv + 1:kv + 1 + km, j]
    P = np.eye(n)[perm]
    return P, L, U


def _givens(a: complex, b: complex):
    r = (abs(a) ** 2 + abs(b) ** 2) ** 0.5
    if r == 0.0:
        return 1.0 + 0j, 0j
    return a / r, b / r


def hessenberg_eigvals(H: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by shifted QR with deflation.

    Uses Givens rotations and the Wilkinson shift, with an exceptional shift
    every tenth sweep on the same eigenvalue.
    """
    H = np.array(H, dtype=complex, copy=True)
    n = H.shape[0]
    eig = []
    hi = n - 1
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            eig.append(H[0, 0])
            break
        lo = hi
        while lo > 0:
            if abs(H[lo, lo - 1]) <= tol * (abs(H[lo, lo]) + abs(H[lo - 1, lo - 1])):
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig.append(H[hi, hi])
            hi -= 1
            sweeps = 0
            continue
        sweeps += 1
        if sweeps > max_sweeps:
            raise QRConvergenceError("shifted QR did not converge")
        a, b, c, d = H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi]
        half = 0.5 * (a + d)
        disc = cmath.sqrt(half * half - (a * d - b * c))
        s1, s2 = half + disc, half - disc
        shift = s1 if abs(s1 - d) <= abs(s2 - d) else s2
        if sweeps % 10 == 0:
            shift = d + 1.5 * abs(c)
        blk = H[lo:hi + 1, lo:hi + 1]
        m = blk.shape[0]
        blk -= shift * np.eye(m)
        rots = []
        for k in range(m - 1):
            cg, sg = _givens(blk[k, k], blk[k + 1, k])
            rk, rk1 = blk[k, k:].copy(), blk[k + 1, k:].copy()
            blk[k, k:] = np.conj(cg) * rk + np.conj(sg) * rk1
            blk[k + 1, k:] = -sg * rk + cg * rk1
            rots.append((cg, sg))
        for k, (cg, sg) in enumerate(rots):
            ck, ck1 = blk[:k + 2, k].copy(), blk[:k + 2, k + 1].copy()
            blk[:k + 2, k] = ck * cg + ck1 * sg
            blk[:k + 2, k + 1] = -ck * np.conj(sg) + ck1 * np.conj(cg)
        blk += shift * np.eye(m)
        H[lo:hi + 1, lo:hi + 1] = blk
    return np.array(eig[::-1])


def charpoly(M: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (highest degree first), Faddeev-LeVerrier."""
    n = M.shape[0]
    coeffs = [1.0 + 0j]
    Mk = np.zeros_like(M, dtype=complex)
    I = np.eye(n)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[-1] * I
        coeffs.append(-np.trace(M @ Mk) / k)
    return np.array(coeffs)


def hessenberg_reduce(M: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity)."""
    H = np.array(M, dtype=complex, copy=True)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, np.conj(v) @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, np.conj(v))
    return H


def arnoldi(op, v0: np.ndarray, m: int):
    """``m`` steps of Arnoldi with modified Gram-Schmidt plus one reorthogonalisation.

    Returns ``(V, H)`` with ``V`` of shape (n, j+1) and ``H`` of shape
    (j+1, j); ``j < m`` on early breakdown (invariant subspace).
    """
    n = v0.shape[0]
    V = np.zeros((n, m + 1), dtype=complex)
    H = np.zeros((m + 1, m), dtype=complex)
    V[:, 0] = v0 / np.linalg.norm(v0)
    for j in range(m):
        w = op(V[:, j])
        wn = np.linalg.norm(w)
        for _ in range(2):
            for i in range(j + 1):
                h = np.vdot(V[:, i], w)
                H[i, j] += h
                w = w - h * V[:, i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j].real <= 1e-14 * max(wn, 1e-300):
            return V[:, :j + 1], H[:j + 1, :j + 1]
        V[:, j + 1] = w / H[j + 1, j]
    return V, H


def _ritz_vector(Hm: np.ndarray, theta: complex) -> np.ndarray:
    m = Hm.shape[0]
    eps = 1e-13 * (abs(theta) + np.linalg.norm(Hm, 1))
    y = np.ones(m, dtype=complex)
    for _ in range(3):
        y = np.linalg.solve(Hm - (theta + eps) * np.eye(m), y)
        y /= np.linalg.norm(y)
    return y
