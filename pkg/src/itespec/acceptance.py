"""Acceptance criteria as reusable evaluators.

Each ``criterion_*`` function takes already computed artifacts (or computes
its own cheap inputs) and returns a :class:`CriterionResult`. The ``report``
command and the acceptance tests share these.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from itespec.counting import SpectrumSet, cone_localization, counting_grid, weyl_fit
from itespec.rootcount import ContourBox, winding_number
from itespec.specialfn import besselj, besselj_oracle
from itespec.weyl import floor_sqrt_sigma, tauberian_check, xi_integral_closed, xi_integral_quad

NAMES = {
    1: "Weyl law, constant index n0=4",
    2: "Weyl law, radial index 3+r^2",
    3: "trace identity, n0=4, p=2, mu=i",
    4: "xi-integral residue formula",
    5: "growth bound N(t)/t^2",
    6: "cone localization stabilizes",
    7: "finite differences vs dispersion",
    8: "Bessel accuracy and integer windings",
    9: "tauberian demonstrator",
}


@dataclass
class CriterionResult:
    id: int
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    @property
    def name(self) -> str:
        return NAMES[self.id]

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"criterion {self.id} [{tag}] {self.name}: {self.detail}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["name"] = self.name
        d["status"] = "pass" if self.passed else "fail"
        return d


def criterion_weyl(spec: SpectrumSet, alpha_ref: float, tol: float, cid: int,
                   window=(20.0, 50.0)) -> CriterionResult:
    fit = weyl_fit(spec, alpha_ref, window)
    return CriterionResult(cid, fit.rel_dev <= tol, fit.rel_dev, tol,
                           f"alpha_hat={fit.alpha_hat:.6f} target={alpha_ref:.6f} "
                           f"rel_dev={fit.rel_dev:.2e} (<= {tol})")


def criterion_1(spec: SpectrumSet) -> CriterionResult:
    return criterion_weyl(spec, 1.25, 0.05, 1)


def criterion_2(spec: SpectrumSet) -> CriterionResult:
    return criterion_weyl(spec, 9.0 / 8.0, 0.08, 2)


def criterion_3(report) -> CriterionResult:
    """``report`` is a TraceReport or its ``to_dict`` form."""
    rows = report["radii"] if isinstance(report, dict) else report.to_dict()["radii"]
    gaps = [r["rel_gap"] for r in rows]
    budget = rows[-1]["tail_budget"]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = decreasing and gaps[-1] <= 0.05 + budget
    return CriterionResult(3, ok, gaps[-1], 0.05 + budget,
                           "rel_gap=" + ", ".join(f"{g:.4f}" for g in gaps)
                           + f" decreasing={decreasing} final<= {0.05 + budget:.4f}")


def xi_matrix():
    for b in np.geomspace(1e-2, 1e2, 9):
        for p in (2, 3, 4):
            for n in (2, 3):
                if 2 * p > n:
                    yield float(b), p, n


def criterion_4() -> CriterionResult:
    worst = 0.0
    for b, p, n in xi_matrix():
        q, _ = xi_integral_quad(b, p, n)
        c = xi_integral_closed(b, p, n)
        worst = max(worst, abs(q - c) / abs(c))
    return CriterionResult(4, worst <= 1e-8, worst, 1e-8, f"max rel diff {worst:.2e} (<= 1e-8)")


def criterion_5(spec: SpectrumSet, t_lo: float = 10.0, bound: float = 5.0) -> CriterionResult:
    t = np.linspace(t_lo, min(50.0, spec.t_max), 401)
    worst = float(np.max(counting_grid(spec, t) / t ** 2))
    return CriterionResult(5, worst <= bound, worst, bound, f"max N(t)/t^2 = {worst:.4f} (<= {bound})")


def criterion_6(spec: SpectrumSet, eps: float = 0.2) -> CriterionResult:
    c30, c50 = cone_localization(spec, eps, [30.0, 50.0])
    return CriterionResult(6, int(c30) == int(c50), float(c50 - c30), 0.0,
                           f"outside-cone count t=30: {c30}, t=50: {c50}")


def criterion_7(rows) -> CriterionResult:
    """``rows``: FdRow objects or dicts with ``rel_gap`` and ``refine_ratio``."""
    def get(r, k):
        return r[k] if isinstance(r, dict) else getattr(r, k)

    gaps = [float(get(r, "rel_gap")) for r in rows]
    ratios = [float(get(r, "refine_ratio")) for r in rows]
    ok = bool(rows) and max(gaps) <= 0.02 and all(3.0 <= q <= 5.0 for q in ratios)
    return CriterionResult(7, ok, max(gaps) if gaps else math.nan, 0.02,
                           f"max rel_gap {max(gaps, default=math.nan):.2e} (<= 0.02), refinement "
                           f"ratios in [{min(ratios, default=math.nan):.3f}, "
                           f"{max(ratios, default=math.nan):.3f}] (within [3, 5])")


def bessel_suite():
    orders = (0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 80)
    moduli = (0.05, 0.7, 3.0, 7.5, 12.5, 20.0, 31.0, 42.0, 50.0)
    angles = np.linspace(-math.pi, math.pi, 12, endpoint=False) + 0.1
    for m in orders:
        for rho in moduli:
            for th in angles:
                yield m, complex(rho * math.cos(th), rho * math.sin(th))


def bessel_max_error() -> float:
    worst = 0.0
    for m, z in bessel_suite():
        ref = complex(besselj_oracle(m, z, digits=20))
        got = besselj(m, z)
        worst = max(worst, abs(got - ref) / abs(ref))
    return worst


def polynomial_winding_cases(n_cases: int = 500, seed: int = 2024):
    """Random polynomials with roots kept at least 0.02 away from the box edges."""
    rng = np.random.default_rng(seed)
    box = ContourBox(-1.0 - 1.0j, 1.5 + 0.5j)
    for _ in range(n_cases):
        deg = int(rng.integers(1, 9))
        roots = []
        while len(roots) < deg:
            z = complex(rng.uniform(-2, 2.5), rng.uniform(-2, 1.5))
            dx = min(abs(z.real - box.lo.real), abs(z.real - box.hi.real))
            dy = min(abs(z.imag - box.lo.imag), abs(z.imag - box.hi.imag))
            inside = box.contains(z)
            if (inside and min(dx, dy) < 0.02) or (not inside and _dist_to_box(z, box) < 0.02):
                continue
            roots.append(z)
        expected = sum(1 for z in roots if box.contains(z))
        yield np.array(roots), box, expected


def _dist_to_box(z, box):
    dx = max(box.lo.real - z.real, 0.0, z.real - box.hi.real)
    dy = max(box.lo.imag - z.imag, 0.0, z.imag - box.hi.imag)
    return math.hypot(dx, dy)


def winding_failures(n_cases: int = 500) -> int:
    bad = 0
    for roots, box, expected in polynomial_winding_cases(n_cases):
        f = lambda z, r=roots: np.prod(np.subtract.outer(np.atleast_1d(z), r), axis=-1)  # noqa: E731
        if winding_number(f, ContourBox(box.lo, box.hi)) != expected:
            bad += 1
    return bad


def criterion_8() -> CriterionResult:
    err = bessel_max_error()
    bad = winding_failures()
    ok = err <= 1e-10 and bad == 0
    return CriterionResult(8, ok, err, 1e-10,
                           f"Bessel max rel err {err:.2e} (<= 1e-10), winding mismatches {bad}/500")


def criterion_9() -> CriterionResult:
    rep = tauberian_check(floor_sqrt_sigma(), 0.5, alpha=math.pi / 2, t_max=1e6)
    a_rel = abs(rep.a_hat - 0.5) / 0.5
    worst = max(a_rel, rep.constant_error)
    return CriterionResult(9, worst <= 0.02, worst, 0.02,
                           f"a_hat={rep.a_hat:.5f}, Karamata constant {rep.karamata:.5f} vs "
                           f"sigma(t)/t^a={rep.sigma_ratio[-1]:.5f}, worst rel {worst:.2e} (<= 0.02)")
