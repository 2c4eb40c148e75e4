"""Full spectrum below a radius, the counting function and the Weyl fit.

Eigenvalues are stored by their canonical wavenumber ``k`` (``Re k > 0``, or
``Re k = 0`` and ``Im k > 0``) together with ``lambda = k^2``. For each
angular mode the zeros of the reduced determinant are located in a
rectangle covering the relevant part of the closed half-plane; symmetry
images that fall into the small margins around the axes are discarded.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from itespec import io
from itespec.dispersion import RefractionIndex, dispersion_fn, parse_index
from itespec.errors import CertificateError, CoverageError
from itespec.rootcount import (ContourBox, PhaseCache, SamplingPolicy, locate_all,
                               winding_with_jitter)

T_MAX_LIMIT = 100.0
SOURCES = ("bessel", "shooting", "fd")


@dataclass(frozen=True)
class EigRecord:
    k: complex
    lam: complex
    mode: int
    degeneracy: int
    root_multiplicity: int = 1
    residual: float = 0.0
    source: str = "bessel"

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.degeneracy != (1 if self.mode == 0 else 2):
            raise ValueError("degeneracy is 1 for mode 0 and 2 otherwise")

    @classmethod
    def from_k(cls, k, mode, multiplicity=1, residual=0.0, source="bessel"):
        k = canonical_k(complex(k))
        return cls(k, k * k, int(mode), 1 if mode == 0 else 2, int(multiplicity),
                   float(residual), source)

    @property
    def delta(self) -> float:
        return self.lam.real

    @property
    def nu(self) -> float:
        return self.lam.imag

    @property
    def weight(self) -> int:
        return self.degeneracy * self.root_multiplicity


def canonical_k(k: complex) -> complex:
    """Representative of {k, -k} in the half-plane Re k > 0 (Im k > 0 on the axis)."""
    if k.real < 0 or (k.real == 0 and k.imag < 0):
        return -k
    return k


@dataclass
class SpectrumSet:
    records: list
    t_max: float
    index: RefractionIndex
    cutoff_mode: int
    completeness_certificate: bool
    regions: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: (abs(r.lam), r.mode, r.k.real, r.k.imag))

    def __len__(self):
        return len(self.records)

    @property
    def abs_lambda(self) -> np.ndarray:
        return np.array([abs(r.lam) for r in self.records])

    @property
    def weights(self) -> np.ndarray:
        return np.array([r.weight for r in self.records], dtype=int)

    def truncated(self, n_records: int) -> "SpectrumSet":
        return SpectrumSet(self.records[:n_records], self.t_max, self.index,
                           self.cutoff_mode, self.completeness_certificate)

    def to_dict(self) -> dict:
        return {
            "header": {
                "index_spec": self.index.spec_string(),
                "t_max": float(self.t_max),
                "cutoff_mode": int(self.cutoff_mode),
                "certificate": bool(self.completeness_certificate),
            },
            "records": [
                {"k_re": r.k.real, "k_im": r.k.imag, "mode": r.mode, "degeneracy": r.degeneracy,
                 "mult": r.root_multiplicity, "residual": r.residual, "source": r.source}
                for r in self.records
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumSet":
        h = d["header"]
        recs = [EigRecord(complex(r["k_re"], r["k_im"]), complex(r["k_re"], r["k_im"]) ** 2,
                          int(r["mode"]), int(r["degeneracy"]), int(r["mult"]),
                          float(r["residual"]), r["source"]) for r in d["records"]]
        return cls(recs, float(h["t_max"]), parse_index(h["index_spec"], validate=False),
                   int(h["cutoff_mode"]), bool(h["certificate"]))

    def save(self, path) -> None:
        io.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "SpectrumSet":
        return cls.from_dict(io.read_json(path))


@dataclass(frozen=True)
class RegionPolicy:
    """Search-region parameters for one mode.

    ``axis_margin`` pads the rectangle across the real and imaginary axes so
    that zeros on the axes never sit on the contour. ``h_start`` is the first
    trial half-height, doubled until the strip above it is zero free.
    """

    axis_margin: float = 0.05
    h_start: float = 3.0
    overshoot: float = 1.02
    sampling: SamplingPolicy = field(default_factory=SamplingPolicy)


def mode_cutoff(index: RefractionIndex, t_max: float) -> int:
    sq = math.sqrt(max(1.0, index.sup_abs()))
    return int(math.ceil(1.2 * t_max * sq - 1e-12)) + 10


@dataclass
class ModeResult:
    mode: int
    roots: list  # (k, multiplicity, relative residual)
    region: ContourBox
    height: float
    axis_sign_changes: int = 0


def _axis_tol(k: complex) -> float:
    return 1e-6 * (1.0 + abs(k))


def _primary_hits(hits, real: bool):
    """Drop symmetry images that lie in the axis margins and snap axis roots."""
    out = []
    for h in hits:
        z, tol = complex(h.location), _axis_tol(h.location)
        if z.real < -tol or (real and z.imag < -tol):
            continue
        if abs(z.imag) <= tol and real:
            z = complex(z.real, 0.0)
        if abs(z.real) <= tol:
            z = complex(0.0, z.imag)
        out.append((z, h.multiplicity, h.relative_residual))
    return out


def _merge(roots, real: bool):
    """Deduplicate primary roots; expand conjugates for real indices."""
    merged = []
    for z, mult, res in sorted(roots, key=lambda r: (r[0].real, r[0].imag)):
        flipped = z.real == 0.0 and z.imag < 0
        z = canonical_k(z)
        for i, (y, my, ry) in enumerate(merged):
            if abs(z - y) <= _axis_tol(y):
                # on the imaginary axis k and -k carry the same lambda
                merged[i] = (y, my + mult if flipped else max(my, mult), max(ry, res))
                break
        else:
            merged.append((z, mult, res))
    if real:
        merged += [(z.conjugate(), mult, res) for z, mult, res in merged
                   if z.real > 0 and z.imag > 0]
    return merged


def _imag_axis_sign_changes(f, top: float, n: int = 2000) -> int:
    y = np.linspace(top / n, top, n)
    v = np.real(f(1j * y))
    s = np.sign(v)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def mode_roots(index: RefractionIndex, m: int, t_max: float,
               policy: RegionPolicy | None = None) -> ModeResult:
    """All canonical zeros ``k`` of the mode-``m`` determinant with ``|k| <= t_max``."""
    policy = policy or RegionPolicy()
    sp = policy.sampling
    x_hi = policy.overshoot * t_max
    top = x_hi
    d = policy.axis_margin
    f = dispersion_fn(index, m, k_max=math.hypot(x_hi, top))
    real = index.is_real
    cache = PhaseCache()
    h = min(policy.h_start, top)
    while h < top:
        strips = [ContourBox(complex(-d, h), complex(x_hi, top))]
        if not real:
            strips.append(ContourBox(complex(-d, -top), complex(x_hi, -h)))
        if all(winding_with_jitter(f, s, sp, cache)[1] == 0 for s in strips):
            break
        h *= 2.0
    h = min(h, top)
    region = ContourBox(complex(-d, -d if real else -h), complex(x_hi, h))
    hits = locate_all(f, region, policy=sp, cache=cache)
    roots = _merge(_primary_hits(hits, real), real)
    roots = [r for r in roots if abs(r[0]) <= t_max]
    changes = 0
    if real:
        changes = _imag_axis_sign_changes(f, top)
        on_axis = sum(mult for z, mult, _ in _merge(_primary_hits(hits, real), real)
                      if z.real == 0.0 and z.imag <= h)
        if changes > on_axis:
            raise CertificateError(f"mode {m}: imaginary-axis scan finds {changes} sign changes, "
                                   f"contour search only {on_axis}")
    return ModeResult(m, roots, hits.region, h, changes)


def _mode_job(args):
    index, m, t_max, policy = args
    return mode_roots(index, m, t_max, policy)


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("ITE_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def _run_modes(index, modes, t_max, policy, threads):
    jobs = [(index, m, t_max, policy) for m in modes]
    n = worker_count(threads)
    if n == 1 or len(jobs) == 1:
        return [_mode_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        # longest jobs (low modes hold the most roots) go first
        return list(pool.map(_mode_job, jobs, chunksize=1))


def compute_spectrum(index: RefractionIndex, t_max: float, policy: RegionPolicy | None = None,
                     threads: int | None = None, modes=None) -> SpectrumSet:
    """Spectrum of the disc transmission problem with ``|k| <= t_max``.

    Parameters
    ----------
    index : RefractionIndex
    t_max : float
        Wavenumber radius, at most 100.
    policy : RegionPolicy, optional
    threads : int, optional
        Worker processes; defaults to ``ITE_THREADS`` or the CPU count.
    modes : iterable of int, optional
        Restrict to these modes. The completeness certificate is then not
        attempted and is reported as False.

    Raises
    ------
    CertificateError
        If one of the two modes above the cutoff has a zero with
        ``|k| <= t_max``.
    """
    index.validate()
    if not 0 < t_max <= T_MAX_LIMIT:
        raise CoverageError(f"t_max must lie in (0, {T_MAX_LIMIT:g}]")
    policy = policy or RegionPolicy()
    cutoff = mode_cutoff(index, t_max)
    certify = modes is None
    modes = list(range(cutoff + 1)) if modes is None else sorted(set(int(m) for m in modes))
    if certify:
        modes += [cutoff + 1, cutoff + 2]
    results = _run_modes(index, modes, t_max, policy, threads)
    source = "shooting" if dispersion_fn(index, 0).path == "shooting" else "bessel"
    records, regions = [], {}
    for res in results:
        if res.mode > cutoff and certify:
            if res.roots:
                raise CertificateError(f"mode {res.mode} above the cutoff {cutoff} has "
                                       f"{len(res.roots)} zeros below t_max")
            continue
        regions[res.mode] = (res.region.lo, res.region.hi)
        records += [EigRecord.from_k(z, res.mode, mult, rr, source) for z, mult, rr in res.roots]
    return SpectrumSet(records, t_max, index, cutoff, certify, regions)


def counting_grid(spec: SpectrumSet, t) -> np.ndarray:
    """Vectorised N(t) = sum of degeneracy * multiplicity over |lambda| <= t^2."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t > spec.t_max * (1 + 1e-12)):
        raise CoverageError(f"t exceeds the spectrum radius {spec.t_max}")
    # compare in t = sqrt|lambda| so that N jumps exactly at those values
    rad = np.sqrt(spec.abs_lambda)
    order = np.argsort(rad)
    cum = np.concatenate([[0], np.cumsum(spec.weights[order])])
    return cum[np.searchsorted(rad[order], t, side="right")]


def counting_function(spec: SpectrumSet, t: float) -> int:
    return int(counting_grid(spec, t)[0])


@dataclass
class FitReport:
    alpha_hat: float
    beta: float
    alpha_ref: float
    rel_dev: float
    t: np.ndarray
    counts: np.ndarray
    ratio: np.ndarray


def weyl_fit(spec: SpectrumSet, alpha_ref: float, window=(20.0, 50.0), n_points: int = 121,
             dim: int = 2) -> FitReport:
    """Least-squares fit ``N(t) ~ alpha t^n + beta t^(n-1)`` on a uniform grid.

    Raises
    ------
    ValueError
        If fewer than 20 grid points are requested or the window is empty.
    """
    lo, hi = map(float, window)
    if n_points < 20 or not 0 <= lo < hi:
        raise ValueError("underdetermined fit: need a nonempty window and >= 20 points")
    t = np.linspace(lo, hi, n_points)
    counts = counting_grid(spec, t)
    design = np.column_stack([t ** dim, t ** (dim - 1)])
    (a, b), *_ = np.linalg.lstsq(design, counts.astype(float), rcond=None)
    ratio = counts / t ** dim
    return FitReport(float(a), float(b), alpha_ref, abs(a - alpha_ref) / alpha_ref, t, counts, ratio)


def cone_localization(spec: SpectrumSet, eps: float, t) -> np.ndarray:
    """Weighted count of eigenvalues outside the cone ``|nu| <= eps delta``, ``delta > 0``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lam = np.array([r.lam for r in spec.records], dtype=complex)
    w = spec.weights
    if lam.size == 0:
        return np.zeros(t.shape, dtype=int)
    outside = (lam.real <= 0) | (np.abs(lam.imag) > eps * lam.real)
    return np.array([int(np.sum(w[outside & (np.abs(lam) <= tt * tt)])) for tt in t])


def count_table(spec: SpectrumSet, t, alpha_ref: float, dim: int = 2):
    """Rows ``(t, N, N / (alpha t^n))`` for CSV export."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    counts = counting_grid(spec, t)
    rows = []
    for tt, n in zip(t, counts):
        ratio = n / (alpha_ref * tt ** dim) if tt > 0 else 0.0
        rows.append((float(tt), int(n), float(ratio)))
    return rows


def write_counts_csv(path, rows) -> None:
    io.write_csv(path, ["t", "N", "alpha_ratio"], rows)
