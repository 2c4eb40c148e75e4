"""Left side of the trace identity from a computed spectrum.

For ``z = r mu`` the partial sum ``sum_j w_j / (lambda_j^p - z^p)`` over the
computed eigenvalues is corrected for the missing tail ``|lambda| > T``
(``T = t_max^2``) using the Weyl fit of the spectrum itself, and the
remaining uncertainty is bounded by integrating ``|lambda|^-p`` against the
measured growth constant ``C = max N(t) / t^n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from itespec import io
from itespec.counting import SpectrumSet, counting_grid, weyl_fit
from itespec.dispersion import RefractionIndex
from itespec.errors import CoverageError
from itespec.weyl import QuadratureSpec, TraceQuery, require_admissible, trace_rhs

SEPARATION_FLOOR = 1e-12
BUDGET_LIMIT = 0.2


class NearSingularError(ArithmeticError):
    """An eigenvalue power lies on top of ``z^p``; impossible for admissible rays."""


def _terms(spec: SpectrumSet, query: TraceQuery, r: float):
    lam = np.array([rec.lam for rec in spec.records], dtype=complex)
    w = spec.weights.astype(float)
    zp = query.z(r) ** query.p
    lp = lam ** query.p
    den = lp - zp
    return w, den, np.abs(lp) + abs(zp)


def separation(spec: SpectrumSet, query: TraceQuery, r: float) -> float:
    """``min |lambda^p - z^p| / (|lambda|^p + |z|^p)`` over the records."""
    if len(spec) == 0:
        return 1.0
    _, den, scale = _terms(spec, query, r)
    return float(np.min(np.abs(den) / scale))


def trace_lhs_partial(spec: SpectrumSet, query: TraceQuery, r: float,
                      index: RefractionIndex | None = None) -> complex:
    """Compensated sum of ``w_j / (lambda_j^p - z^p)`` over all records.

    Raises
    ------
    InadmissibleMuError
        If ``query.mu`` is not admissible for the index.
    NearSingularError
        If some denominator is below ``1e-12`` of its natural scale.
    """
    require_admissible(query, index if index is not None else spec.index)
    if len(spec) == 0:
        return 0j
    w, den, scale = _terms(spec, query, r)
    if np.any(np.abs(den) < SEPARATION_FLOOR * scale):
        raise NearSingularError("lambda^p coincides with z^p")
    vals = w / den
    return complex(math.fsum(vals.real), math.fsum(vals.imag))


def growth_constant(spec: SpectrumSet, dim: int = 2, n_grid: int = 400) -> float:
    """``C = max N(t) / t^n`` over a grid on ``[t_max / 50, t_max]``."""
    t = np.linspace(spec.t_max / 50.0, spec.t_max, n_grid)
    return float(np.max(counting_grid(spec, t) / t ** dim))


def tail_bound(spec: SpectrumSet, query: TraceQuery, r: float, growth: float | None = None) -> float:
    """Bound on ``sum over |lambda| > T`` of ``1 / |lambda^p - z^p|``.

    Raises
    ------
    CoverageError
        If ``T = t_max^2 < 2 r``.
    """
    n, p = query.dim, query.p
    T = spec.t_max ** 2
    if T < 2 * r:
        raise CoverageError(f"spectrum radius T={T:g} does not cover 2r={2 * r:g}")
    if 2 * p <= n:
        raise ValueError("tail diverges for 2p <= n")
    growth = growth_constant(spec, n) if growth is None else growth
    c = 1.0 - 2.0 ** (-p)
    return growth * n / (2 * p - n) * T ** ((n - 2 * p) / 2) / c


def tail_estimate(alpha: float, beta: float, query: TraceQuery, r: float, t_from: float) -> complex:
    """``int_{t_from}^inf dN(t) / (t^(2p) - z^p)`` for ``N = alpha t^n + beta t^(n-1)``.

    Real eigenvalues ``lambda = t^2`` are assumed on the tail; the geometric
    Gauss panels run out to ``1e8 t_from``, past which the integrand is
    negligible for ``2p > n``.
    """
    n, p = query.dim, query.p
    zp = query.z(r) ** p
    x, w = np.polynomial.legendre.leggauss(24)
    edges = t_from * 2.0 ** np.arange(0, 27 + 1, 0.5)
    total = 0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        dens = n * alpha * t ** (n - 1) + (n - 1) * beta * t ** (n - 2)
        total += 0.5 * (hi - lo) * np.sum(w * dens / (t ** (2 * p) - zp))
    return complex(total)


@dataclass
class TraceReport:
    radii: list
    lhs: list
    lhs_partial: list
    rhs: list
    rel_gap: list
    tail_budget: list
    min_separation: list
    normalization: list

    @property
    def normalized_lhs(self):
        return [l * s for l, s in zip(self.lhs, self.normalization)]

    @property
    def rhs_constant(self):
        return [q * s for q, s in zip(self.rhs, self.normalization)]

    @property
    def inconclusive(self):
        return [b > BUDGET_LIMIT for b in self.tail_budget]

    @property
    def gap_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.rel_gap, self.rel_gap[1:]))

    def to_dict(self) -> dict:
        rows = []
        for i, r in enumerate(self.radii):
            rows.append({
                "r": float(r),
                "lhs_re": self.lhs[i].real, "lhs_im": self.lhs[i].imag,
                "lhs_partial_re": self.lhs_partial[i].real, "lhs_partial_im": self.lhs_partial[i].imag,
                "rhs_re": self.rhs[i].real, "rhs_im": self.rhs[i].imag,
                "rel_gap": float(self.rel_gap[i]),
                "tail_budget": float(self.tail_budget[i]),
                "min_separation": float(self.min_separation[i]),
                "inconclusive": bool(self.inconclusive[i]),
            })
        return {"radii": rows, "gap_decreasing": self.gap_decreasing}

    def csv_rows(self):
        out = []
        for i, r in enumerate(self.radii):
            nl, rc = self.normalized_lhs[i], self.rhs_constant[i]
            out.append((float(r), nl.real, nl.imag, abs(rc), float(self.rel_gap[i]),
                        float(self.tail_budget[i])))
        return out

    def save_json(self, path) -> None:
        io.write_json(path, self.to_dict())

    def save_csv(self, path) -> None:
        io.write_csv(path, ["r", "normalized_lhs_re", "normalized_lhs_im", "rhs_const",
                            "rel_gap", "tail_budget"], self.csv_rows())


def trace_compare(spec: SpectrumSet, query: TraceQuery, index: RefractionIndex | None = None,
                  alpha_ref: float | None = None, qspec: QuadratureSpec | None = None) -> TraceReport:
    """Compare the tail-corrected left side with :func:`trace_rhs` per radius.

    The tail model is the Weyl fit ``alpha t^n + beta t^(n-1)`` of the
    spectrum on ``[t_max / 2, t_max]``. ``tail_budget`` is the tail bound
    relative to ``|rhs|``.
    """
    index = index if index is not None else spec.index
    require_admissible(query, index)
    n, p = query.dim, query.p
    growth = growth_constant(spec, n)
    if len(spec):
        fit = weyl_fit(spec, alpha_ref or 1.0, (spec.t_max / 2, spec.t_max), dim=n)
        alpha, beta = fit.alpha_hat, fit.beta
    else:
        alpha = beta = 0.0
    out = TraceReport([], [], [], [], [], [], [], [])
    for r in query.radii:
        partial = trace_lhs_partial(spec, query, r, index)
        lhs = partial + tail_estimate(alpha, beta, query, r, spec.t_max)
        rhs = trace_rhs(query, index, r, qspec)
        budget = tail_bound(spec, query, r, growth) / abs(rhs)
        out.radii.append(float(r))
        out.lhs.append(lhs)
        out.lhs_partial.append(partial)
        out.rhs.append(rhs)
        out.rel_gap.append(abs(lhs - rhs) / abs(rhs))
        out.tail_budget.append(budget)
        out.min_separation.append(separation(spec, query, r))
        out.normalization.append(r ** (p - n / 2))
    return out


def a_sum(spec: SpectrumSet, r: float) -> float:
    """``sum_j w_j / (delta_j^2 + r^2)``: the real-part proxy of the p=2, mu=i sum."""
    delta = np.array([rec.delta for rec in spec.records])
    return math.fsum(spec.weights / (delta ** 2 + r * r))
