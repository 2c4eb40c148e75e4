"""Zeros of entire functions in rectangles by the argument principle.

The winding number is obtained by tracking the phase of ``f`` along the box
boundary; no derivative is required. Each boundary segment is sampled
adaptively until consecutive phase increments stay below pi/2. The same
samples give the contour moments ``(1/2 pi i) oint z^p f'/f dz`` (power sums
of the enclosed zeros), which seed Muller's iteration in the leaves.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from itespec.errors import (ConservationError, RootRefinementError, WindingConvergenceError,
                            ZeroOnContourError)

TWO_PI = 2.0 * math.pi
MAX_DEPTH = 40
MULLER_MAX_ITER = 60
# deterministic jitter offsets, in units of 1e-4 * box diagonal
JITTER = ((0.53, 0.31), (-0.47, 0.71), (0.83, -0.59), (-0.91, -0.23), (0.29, 0.97))


@dataclass
class ContourBox:
    lo: complex
    hi: complex
    winding: int | None = None
    min_edge_modulus: float = math.inf

    def __post_init__(self):
        self.lo = complex(self.lo)
        self.hi = complex(self.hi)
        if not (self.lo.real < self.hi.real and self.lo.imag < self.hi.imag):
            raise ValueError(f"degenerate box {self.lo} .. {self.hi}")
        if self.winding is not None and self.winding < 0:
            raise ValueError("winding of an entire function is nonnegative")

    @property
    def corners(self):
        lo, hi = self.lo, self.hi
        return (lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag))

    @property
    def center(self) -> complex:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi.real - self.lo.real

    @property
    def height(self) -> float:
        return self.hi.imag - self.lo.imag

    @property
    def diagonal(self) -> float:
        return abs(self.hi - self.lo)

    def contains(self, z, pad: float = 0.0) -> bool:
        return (self.lo.real - pad <= z.real <= self.hi.real + pad
                and self.lo.imag - pad <= z.imag <= self.hi.imag + pad)

    def inflated(self, factor: float) -> "ContourBox":
        c, half = self.center, 0.5 * factor * (self.hi - self.lo)
        return ContourBox(c - half, c + half)

    def jittered(self, attempt: int) -> "ContourBox":
        a, b = JITTER[attempt % len(JITTER)]
        d = 1e-4 * self.diagonal
        return ContourBox(self.lo + d * complex(a, b), self.hi + d * complex(b, -a))

    def split(self, frac: float = 0.5):
        """Two halves across the longer edge; ``frac`` places the cut."""
        lo, hi = self.lo, self.hi
        if self.width >= self.height:
            x = lo.real + frac * self.width
            return ContourBox(lo, complex(x, hi.imag)), ContourBox(complex(x, lo.imag), hi)
        y = lo.imag + frac * self.height
        return ContourBox(lo, complex(hi.real, y)), ContourBox(complex(lo.real, y), hi)


@dataclass(frozen=True)
class SamplingPolicy:
    initial: int = 16
    density: float = 3.0
    max_per_edge: int = 2 ** 18
    modulus_floor: float = 1e-13
    integer_tol: float = 0.25
    max_jitter: int = 5


@dataclass
class RootHit:
    location: complex
    multiplicity: int
    residual: float
    box: ContourBox | None = None
    scale: float = field(default=1.0, repr=False)

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale if self.scale > 0 else math.inf


class RootList(list):
    """List of :class:`RootHit` that also remembers the region actually used."""

    region: ContourBox | None = None


@dataclass
class _Segment:
    phase: float
    minabs: float
    median: float
    moments: np.ndarray  # sum over samples of z^p dlog f, p = 0, 1, 2

    def reversed(self):
        return _Segment(-self.phase, self.minabs, self.median, -self.moments)


class PhaseCache(dict):
    """Segment results keyed by endpoints; reversed lookups negate the phase."""

    def get_segment(self, a, b):
        seg = self.get((a, b))
        if seg is not None:
            return seg
        seg = self.get((b, a))
        return seg.reversed() if seg is not None else None


def _segment(f, a: complex, b: complex, policy: SamplingPolicy, cache: PhaseCache | None) -> _Segment:
    if cache is not None:
        hit = cache.get_segment(a, b)
        if hit is not None:
            return hit
    length = abs(b - a)
    rate = getattr(f, "phase_rate", 1.0)
    n = max(policy.initial, int(math.ceil(length * policy.density * rate)))
    t = np.linspace(0.0, 1.0, n + 1)
    vals = np.asarray(f(a + t * (b - a)), dtype=complex)
    med = float(np.median(np.abs(vals)))
    verified = False
    while True:
        if not np.all(np.isfinite(vals)):
            raise ZeroOnContourError("non-finite function value on contour")
        absv = np.abs(vals)
        # the floor is relative to neighbouring samples: |f| may vary by many
        # orders of magnitude along one edge, so a global median is no scale
        nb = np.maximum(np.r_[absv[1], absv[:-1]], np.r_[absv[1:], absv[-2]])
        if np.any(absv <= policy.modulus_floor * nb):
            raise ZeroOnContourError(f"|f| hits the modulus floor on segment {a} -> {b}")
        dth = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dth) >= 0.5 * math.pi
        if not bad.any():
            if verified:
                break
            # a wrapped increment hides a full turn between two samples; bisect
            # every interval once and keep refining where the halves disagree
            tn = 0.5 * (t[1:] + t[:-1])
            vn = np.asarray(f(a + tn * (b - a)), dtype=complex)
            halves = np.angle(vn / vals[:-1]) + np.angle(vals[1:] / vn)
            t = np.insert(t, np.arange(1, len(t)), tn)
            vals = np.insert(vals, np.arange(1, len(vals)), vn)
            verified = not np.any(np.abs(halves - dth) > 1.0)
            continue
        if len(t) > policy.max_per_edge:
            raise WindingConvergenceError(f"more than {policy.max_per_edge} samples on one edge")
        idx = np.nonzero(bad)[0]
        if np.min(t[idx + 1] - t[idx]) * length <= 4e-16 * (abs(a) + abs(b) + length):
            raise ZeroOnContourError(f"phase jump unresolved at machine resolution on {a} -> {b}")
        tn = 0.5 * (t[idx] + t[idx + 1])
        vn = np.asarray(f(a + tn * (b - a)), dtype=complex)
        t = np.insert(t, idx + 1, tn)
        vals = np.insert(vals, idx + 1, vn)
    z = a + t * (b - a)
    zmid = 0.5 * (z[1:] + z[:-1])
    dlog = np.log(absv[1:] / absv[:-1]) + 1j * dth
    moments = np.array([np.sum(dlog), np.sum(zmid * dlog), np.sum(zmid * zmid * dlog)])
    seg = _Segment(float(np.sum(dth)), float(np.min(absv)), med, moments)
    if cache is not None:
        cache[(a, b)] = seg
    return seg


def _closed_path(f, vertices, policy, cache):
    segs = [_segment(f, vertices[i], vertices[(i + 1) % len(vertices)], policy, cache)
            for i in range(len(vertices))]
    total = sum(s.phase for s in segs) / TWO_PI
    w = int(round(total))
    if abs(total - w) > policy.integer_tol:
        raise WindingConvergenceError(f"phase total {total:.3f} is not near an integer")
    moments = sum(s.moments for s in segs) / (TWO_PI * 1j)
    return w, segs, moments


def winding_number(f, box: ContourBox, policy: SamplingPolicy | None = None,
                   cache: PhaseCache | None = None) -> int:
    """Number of zeros of ``f`` inside ``box`` (with multiplicity).

    Updates ``box.winding`` and ``box.min_edge_modulus``.

    Raises
    ------
    ZeroOnContourError
        ``|f|`` falls below the modulus floor on the boundary.
    WindingConvergenceError
        Sampling limit exceeded or the phase total is not near an integer.
    """
    policy = policy or SamplingPolicy()
    w, segs, _ = _closed_path(f, box.corners, policy, cache)
    if w < 0:
        raise WindingConvergenceError(f"negative winding {w} for an entire function")
    box.winding = w
    box.min_edge_modulus = min(s.minabs for s in segs)
    return w


def _box_data(f, box, policy, cache):
    w, segs, moments = _closed_path(f, box.corners, policy, cache)
    if w < 0:
        raise WindingConvergenceError(f"negative winding {w} for an entire function")
    box.winding = w
    box.min_edge_modulus = min(s.minabs for s in segs)
    return w, moments


def winding_with_jitter(f, box: ContourBox, policy: SamplingPolicy | None = None,
                        cache: PhaseCache | None = None):
    """Winding number, perturbing the box deterministically if a zero sits on it.

    Returns ``(box_used, winding)``.
    """
    policy = policy or SamplingPolicy()
    try:
        return box, winding_number(f, box, policy, cache)
    except ZeroOnContourError:
        err = None
        for attempt in range(policy.max_jitter):
            jb = box.jittered(attempt)
            try:
                return jb, winding_number(f, jb, policy, cache)
            except ZeroOnContourError as exc:
                err = exc
        raise err


def _split_counted(f, box, w, policy, cache):
    """Split ``box`` in two and count each half; the cut moves if it hits a zero."""
    fracs = (0.5,) + tuple(0.5 + 1e-4 * a for a, _ in JITTER)
    err = None
    for frac in fracs:
        left, right = box.split(frac)
        try:
            wl, ml = _box_data(f, left, policy, cache)
            wr, mr = _box_data(f, right, policy, cache)
        except ZeroOnContourError as exc:
            err = exc
            continue
        if wl + wr != w:
            raise ConservationError(f"split windings {wl} + {wr} != parent {w}")
        return (left, wl, ml), (right, wr, mr)
    raise err


def subdivide_count(f, box: ContourBox, max_per_leaf: int = 2,
                    policy: SamplingPolicy | None = None, cache: PhaseCache | None = None):
    """Bisect ``box`` until every leaf holds at most ``max_per_leaf`` zeros.

    Returns the leaves with nonzero winding; their windings sum to the root
    winding.
    """
    policy = policy or SamplingPolicy()
    cache = PhaseCache() if cache is None else cache
    w, _ = _box_data(f, box, policy, cache)
    leaves = []

    def rec(b, wb, depth):
        if wb == 0:
            return
        if wb <= max_per_leaf:
            leaves.append(b)
            return
        if depth >= MAX_DEPTH:
            raise RecursionError(f"subdivision depth limit {MAX_DEPTH} reached")
        for child, wc, _ in _split_counted(f, b, wb, policy, cache):
            rec(child, wc, depth + 1)

    rec(box, w, 0)
    return leaves


def _muller(f, x0, x1, x2, tol_f, bound: ContourBox | None):
    f0, f1, f2 = f(x0), f(x1), f(x2)
    for _ in range(MULLER_MAX_ITER):
        if f2 == 0:
            break
        h1, h2 = x1 - x0, x2 - x1
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            break
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = cmath.sqrt(b * b - 4.0 * a * f2)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        dx = -2.0 * f2 / den if den != 0 else 1e-3 * (1.0 + abs(x2))
        x3 = x2 + dx
        if bound is not None and not bound.contains(x3):
            raise RootRefinementError(f"Muller iterate {x3} left the search box")
        f3 = f(x3)
        x0, x1, x2 = x1, x2, x3
        f0, f1, f2 = f1, f2, f3
        if abs(f3) <= tol_f or abs(dx) <= 1e-14 * (1.0 + abs(x3)):
            break
    return x2, f2


def local_scale(f, z: complex, radius: float = 0.1, npts: int = 8) -> float:
    ang = np.exp(2j * math.pi * np.arange(npts) / npts)
    return float(np.max(np.abs(f(z + radius * ang))))


def multiplicity(f, z: complex, radius: float | None = None,
                 policy: SamplingPolicy | None = None) -> int:
    """Winding number of ``f`` on a small circle (a 16-gon) centred at ``z``."""
    policy = policy or SamplingPolicy()
    radius = radius if radius is not None else 1e-4 * (1.0 + abs(z))
    verts = [z + radius * cmath.exp(2j * math.pi * j / 16) for j in range(16)]
    w, _, _ = _closed_path(f, verts, SamplingPolicy(initial=4, density=0.0,
                                                     max_per_edge=policy.max_per_edge,
                                                     modulus_floor=0.0), None)
    return w


def refine_root(f, seed: complex, box: ContourBox | None = None, step: float | None = None,
                policy: SamplingPolicy | None = None, rtol: float = 1e-10) -> RootHit:
    """Muller iteration from ``seed``, then multiplicity by a small-circle winding.

    Raises
    ------
    RootRefinementError
        If an iterate leaves the twice-inflated box.
    """
    seed = complex(seed)
    if step is None:
        step = 0.05 * (min(box.width, box.height) if box is not None else 1.0)
    step = max(step, 1e-8 * (1.0 + abs(seed)))
    bound = box.inflated(2.0) if box is not None else None
    scale = local_scale(f, seed)
    loc = seed
    for _ in range(3):
        # restart with a small stencil until the residual meets the local scale
        x0, x1, x2 = loc - step, loc + step * 1j, loc
        loc, val = _muller(f, x0, x1, x2, rtol * scale, bound)
        scale = local_scale(f, loc)
        if abs(val) <= rtol * scale:
            break
        step = 1e-7 * (1.0 + abs(loc))
    mult = multiplicity(f, loc, policy=policy)
    return RootHit(loc, mult, abs(val), box, scale)


def _deflated(f, roots):
    def g(z):
        out = f(z)
        for r, mlt in roots:
            out = out / (z - r) ** mlt
        return out
    g.phase_rate = getattr(f, "phase_rate", 1.0)
    return g


def _leaf_seeds(box, w, moments):
    if w == 1:
        s = moments[1] / moments[0] if abs(moments[0]) > 0.5 else moments[1]
        return [s]
    p1, p2 = moments[1], moments[2]
    disc = cmath.sqrt(2.0 * p2 - p1 * p1)
    return [0.5 * (p1 + disc), 0.5 * (p1 - disc)]


def _solve_leaf(f, box, w, moments, policy, rtol):
    hits = []
    found = 0
    seeds = _leaf_seeds(box, w, moments)
    for seed in seeds:
        if found >= w:
            break
        if not box.contains(seed):
            seed = box.center
        g = _deflated(f, [(h.location, h.multiplicity) for h in hits]) if hits else f
        hit = refine_root(g, seed, box, policy=policy, rtol=rtol)
        if hits:
            # polish on the undeflated function
            hit = refine_root(f, hit.location, box, step=1e-6 * (1 + abs(hit.location)),
                              policy=policy, rtol=rtol)
        if not box.contains(hit.location) or hit.multiplicity < 1:
            return None
        if any(abs(hit.location - h.location) <= 1e-6 * (1 + abs(h.location)) for h in hits):
            return None
        hits.append(hit)
        found += hit.multiplicity
    if found != w:
        return None
    return hits


def locate_all(f, region: ContourBox, max_per_leaf: int = 2,
               policy: SamplingPolicy | None = None, rtol: float = 1e-10,
               cache: PhaseCache | None = None) -> RootList:
    """All zeros of ``f`` inside ``region``, refined and deduplicated.

    The multiplicities of the returned hits sum to the winding number of
    the region actually used (``result.region``, jittered if needed).

    Raises
    ------
    ConservationError
        If the refined multiplicities do not add up to the region winding.
    """
    policy = policy or SamplingPolicy()
    cache = PhaseCache() if cache is None else cache
    region, _ = winding_with_jitter(f, region, policy, cache)
    w_region, moments = _box_data(f, region, policy, cache)
    hits = []

    def rec(b, wb, mom, depth):
        if wb == 0:
            return
        if wb <= max_per_leaf:
            try:
                leaf_hits = _solve_leaf(f, b, wb, mom, policy, rtol)
            except (RootRefinementError, WindingConvergenceError, ZeroOnContourError):
                leaf_hits = None
            if leaf_hits is not None:
                hits.extend(leaf_hits)
                return
        if depth >= MAX_DEPTH:
            raise RecursionError(f"subdivision depth limit {MAX_DEPTH} reached")
        for child, wc, mc in _split_counted(f, b, wb, policy, cache):
            rec(child, wc, mc, depth + 1)

    rec(region, w_region, moments, 0)
    out = RootList(_dedupe(hits))
    out.region = region
    total = sum(h.multiplicity for h in out)
    if total != w_region:
        raise ConservationError(f"found multiplicity {total} but region winding is {w_region}")
    return out


def _dedupe(hits):
    kept = []
    for h in sorted(hits, key=lambda h: (h.location.real, h.location.imag)):
        for i, k in enumerate(kept):
            if abs(h.location - k.location) <= 1e-6 * (1.0 + abs(k.location)):
                if h.multiplicity > k.multiplicity:
                    kept[i] = h
                break
        else:
            kept.append(h)
    return kept
