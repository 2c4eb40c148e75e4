"""Finite-difference cross-check of the per-mode spectrum.

The radial transmission problem for mode ``m`` is discretised on
``r_i = i h`` (``i = 1..N``, ``h = 1/N``) with second-order central
differences. Unknowns are interleaved ``[w_1, v_1, w_2, v_2, ...]`` so that
the pencil ``A - lambda B`` is banded. The last two rows couple ``w`` and
``v`` at ``r = 1`` (equal values and equal one-sided derivatives); ``B`` is
zero there, which gives the pencil infinite eigenvalues that shift-invert
never sees.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from itespec import io
from itespec.counting import EigRecord, mode_roots
from itespec.dispersion import RefractionIndex
from itespec.linalg import (ArnoldiStagnationError, LUBreakdownError, _ritz_vector, arnoldi,
                            band_factor, band_matvec, hessenberg_eigvals)

KL, KU = 6, 2
MAX_ARNOLDI_STEPS = 400


class InsufficientOverlapError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    N: int

    def __post_init__(self):
        if self.N < 32:
            raise ValueError("grid needs N >= 32")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def points(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * self.h


@dataclass
class PencilPair:
    """Banded ``A`` in gbtrf storage (``KL``, ``KU``) and diagonal ``B``."""

    A: np.ndarray
    B: np.ndarray
    kl: int = KL
    ku: int = KU
    shift: complex = 0j

    @property
    def size(self) -> int:
        return self.B.shape[0]

    def shifted(self, sigma: complex) -> np.ndarray:
        ab = self.A.copy()
        ab[self.kl + self.ku] -= sigma * self.B
        return ab

    def apply(self, lam: complex, x: np.ndarray) -> np.ndarray:
        """``(A - lam B) x``."""
        return band_matvec(self.A, self.kl, self.ku, x) - lam * self.B * x

    def dense(self):
        from itespec.linalg import band_to_dense
        return band_to_dense(self.A, self.kl, self.ku), np.diag(self.B)

    @property
    def norm_a(self) -> float:
        return float(np.max(np.sum(np.abs(self.A), axis=0)))


def _set(ab, i, j, val):
    ab[KL + KU + i - j, j] += val


def assemble_radial_fd(index: RefractionIndex, m: int, grid: RadialGrid) -> PencilPair:
    """Pencil for ``-(u'' + u'/r - m^2 u / r^2) = lambda n u`` (w) and ``= lambda u`` (v).

    Interior rows are multiplied by ``h^2`` and the derivative coupling row
    by ``h`` so that every row has O(1) entries.
    """
    index.validate()
    if index.kind == "absorbing":
        raise ValueError("the absorbing family is nonlinear in k; no linear pencil exists")
    if m < 0:
        raise ValueError("mode must be nonnegative")
    N, h = grid.N, grid.h
    r = grid.points
    nvals = np.asarray(index.value(r), dtype=complex) * np.ones(N)
    size = 2 * N
    ab = np.zeros((2 * KL + KU + 1, size), dtype=complex)
    B = np.zeros(size, dtype=complex)
    for i in range(1, N):  # interior radii r_1 .. r_{N-1}
        ri = r[i - 1]
        lower = -(1.0 - h / (2 * ri))
        diag = 2.0 + (m * h / ri) ** 2
        upper = -(1.0 + h / (2 * ri))
        for blk, coef in ((0, nvals[i - 1]), (1, 1.0)):
            row = 2 * (i - 1) + blk
            col = lambda j: 2 * (j - 1) + blk  # noqa: E731
            _set(ab, row, col(i), diag)
            _set(ab, row, col(i + 1), upper)
            if i > 1:
                _set(ab, row, col(i - 1), lower)
            elif m == 0:
                # u_0 = (4 u_1 - u_2) / 3 from u'(0) = 0
                _set(ab, row, col(1), 4.0 * lower / 3.0)
                _set(ab, row, col(2), -lower / 3.0)
            B[row] = coef * h * h
    w = lambda j: 2 * (j - 1)  # noqa: E731
    v = lambda j: 2 * (j - 1) + 1  # noqa: E731
    row = 2 * N - 2
    _set(ab, row, w(N), 1.0)
    _set(ab, row, v(N), -1.0)
    row = 2 * N - 1
    for j, c in ((N, 1.5), (N - 1, -2.0), (N - 2, 0.5)):
        _set(ab, row, w(j), c)
        _set(ab, row, v(j), -c)
    # shrink to the compact A storage used by matvec (same layout, fill rows zero)
    return PencilPair(ab, B)


def shift_invert_arnoldi(pencil: PencilPair, sigma: complex, k_eigs: int = 3,
                         tol: float = 1e-10, krylov: int | None = None):
    """Eigenvalues of the pencil nearest ``sigma``.

    Returns a list of ``(lambda, residual, x)`` with
    ``residual = ||(A - lambda B) x|| / ||x||`` and every residual at most
    ``tol * (||A|| + |lambda| ||B||)``.

    Raises
    ------
    LUBreakdownError
        If ``A - sigma B`` is numerically singular.
    ArnoldiStagnationError
        If the wanted Ritz pairs do not converge within 400 Arnoldi steps.
    """
    fac = band_factor(pencil.shifted(sigma), pencil.kl, pencil.ku)
    n = pencil.size
    op = lambda x: fac.solve(pencil.B * x)  # noqa: E731
    krylov = krylov or min(n, max(2 * k_eigs + 20, 30))
    v0 = np.random.default_rng(12345).standard_normal(n) + 0j
    norm_b = float(np.max(np.abs(pencil.B)))
    steps = 0
    while steps < MAX_ARNOLDI_STEPS:
        V, H = arnoldi(op, v0, krylov)
        j = H.shape[1]
        steps += j
        Hm = H[:j, :j]
        theta = hessenberg_eigvals(Hm)
        order = np.argsort(-np.abs(theta))[:k_eigs]
        out, converged = [], True
        combo = np.zeros(n, dtype=complex)
        for t in theta[order]:
            if t == 0:
                continue
            lam = sigma + 1.0 / t
            x = V[:, :j] @ _ritz_vector(Hm, t)
            x /= np.linalg.norm(x)
            res = float(np.linalg.norm(pencil.apply(lam, x)))
            if res > tol * (pencil.norm_a + abs(lam) * norm_b):
                converged = False
            out.append((complex(lam), res, x))
            combo += x
        if converged and out:
            return sorted(out, key=lambda e: abs(e[0] - sigma))
        v0 = combo if np.linalg.norm(combo) > 0 else V[:, -1]
    raise ArnoldiStagnationError(f"no convergence within {MAX_ARNOLDI_STEPS} Arnoldi steps")


def _solve_with_retry(pencil, sigma, k_eigs, tol):
    for attempt in range(4):
        try:
            return shift_invert_arnoldi(pencil, sigma, k_eigs, tol)
        except LUBreakdownError:
            sigma = sigma + 1e-8 * (1 + abs(sigma)) * complex(1, 1) * (attempt + 1)
    return shift_invert_arnoldi(pencil, sigma, k_eigs, tol)


def fd_spectrum(index: RefractionIndex, m: int, grid: RadialGrid, shifts, k_eigs: int = 2,
                tol: float = 1e-10) -> list:
    """Union of shift-invert sweeps as canonical :class:`EigRecord` (source ``fd``)."""
    pencil = assemble_radial_fd(index, m, grid)
    found = []
    for s in shifts:
        for lam, res, _ in _solve_with_retry(pencil, complex(s), k_eigs, tol):
            if all(abs(lam - f[0]) > 1e-8 * (1 + abs(lam)) for f in found):
                found.append((lam, res))
    recs = [EigRecord.from_k(cmath.sqrt(lam), m, 1, res, "fd") for lam, res in found]
    return sorted(recs, key=lambda r: (abs(r.lam), r.lam.imag))


def dispersion_reference(index: RefractionIndex, m: int, count: int, t_start: float = 8.0):
    """The ``count`` smallest-|lambda| eigenvalues of mode ``m`` from the determinant."""
    t = t_start
    while True:
        res = mode_roots(index, m, t)
        lams = sorted((z * z for z, mult, _ in res.roots for _ in range(mult)),
                      key=lambda l: (abs(l), l.imag))
        # only trust ranks whose |lambda| is safely inside the searched disc
        inner = [l for l in lams if abs(l) <= (0.9 * t) ** 2]
        if len(inner) >= count:
            return inner[:count]
        if t > 100:
            raise InsufficientOverlapError(f"mode {m}: fewer than {count} dispersion roots")
        t *= 1.5


@dataclass
class FdRow:
    mode: int
    rank: int
    lam_fd: complex
    lam_disp: complex
    rel_gap: float
    refine_ratio: float


def _nearest_fd(pencil, lam_ref):
    cands = _solve_with_retry(pencil, lam_ref, 1, 1e-10)
    return min(cands, key=lambda e: abs(e[0] - lam_ref))[0]


def fd_vs_shooting(index: RefractionIndex, modes, grid: RadialGrid, count: int = 5,
                   coarse: RadialGrid | None = None) -> list:
    """Per mode, the ``count`` smallest eigenvalues from both sources.

    FD eigenvalues are matched to dispersion roots by proximity (shift at
    the dispersion value). ``refine_ratio`` is the error on ``coarse``
    (default ``N/2``) divided by the error on ``grid``.

    Raises
    ------
    InsufficientOverlapError
        If either source yields fewer than ``count`` eigenvalues.
    """
    coarse = coarse or RadialGrid(grid.N // 2)
    rows = []
    for m in modes:
        ref = dispersion_reference(index, m, count)
        fine = assemble_radial_fd(index, m, grid)
        crs = assemble_radial_fd(index, m, coarse)
        for rank, lam_ref in enumerate(ref):
            lam_f = _nearest_fd(fine, lam_ref)
            lam_c = _nearest_fd(crs, lam_ref)
            err_f = abs(lam_f - lam_ref)
            err_c = abs(lam_c - lam_ref)
            ratio = err_c / err_f if err_f > 0 else math.inf
            rows.append(FdRow(m, rank, lam_f, lam_ref, err_f / abs(lam_ref), ratio))
        fd_ranks = sum(1 for r in rows if r.mode == m)
        if fd_ranks < count:
            raise InsufficientOverlapError(f"mode {m}: FD produced {fd_ranks} < {count} eigenvalues")
    return rows


FD_CSV_HEADER = ["mode", "rank", "lambda_fd_re", "lambda_fd_im", "lambda_disp_re",
                 "lambda_disp_im", "rel_gap", "refine_ratio"]


def fd_csv_rows(rows):
    return [(r.mode, r.rank, r.lam_fd.real, r.lam_fd.imag, r.lam_disp.real, r.lam_disp.imag,
             float(r.rel_gap), float(r.refine_ratio)) for r in rows]


def write_fd_csv(path, rows) -> None:
    io.write_csv(path, FD_CSV_HEADER, fd_csv_rows(rows))
