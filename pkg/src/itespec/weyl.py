"""Closed-form constants: the cone of the index, admissible rays, the Weyl
coefficient, the xi-integral and the right side of the trace identity.

Everything here is cheap and deterministic; the quadrature versions exist to
cross-check the closed forms.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from itespec.dispersion import RefractionIndex
from itespec.errors import FullPlaneConeError, HypothesisViolation, InadmissibleMuError

ANGLE_MARGIN = 1e-6
RANGE_PAD = 1e-9


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class ConeModel:
    """Sector ``[theta1, theta2]`` (radians) containing the cone of the index."""

    angles: tuple
    samples: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        t1, t2 = self.angles
        if not t2 - t1 < 2 * math.pi:
            raise FullPlaneConeError("cone covers the whole plane")

    @property
    def width(self) -> float:
        return self.angles[1] - self.angles[0]

    def contains_angle(self, theta: float, margin: float = 0.0) -> bool:
        t1, t2 = self.angles
        # shift theta into [t1 - pi, t1 + pi) before comparing
        d = (theta - t1 + math.pi) % (2 * math.pi) - math.pi
        return -margin <= d <= (t2 - t1) + margin


@dataclass(frozen=True)
class TraceQuery:
    mu: complex
    p: int
    radii: tuple = (100.0, 400.0, 1600.0)
    dim: int = 2

    def __post_init__(self):
        if abs(abs(self.mu) - 1.0) > 1e-12:
            raise ValueError("mu must have unit modulus")
        if not (2 * self.p > self.dim and 4 * self.p > 4 + self.dim):
            raise HypothesisViolation(f"p={self.p} violates 2p > n and 4p > 4 + n for n={self.dim}")
        if list(self.radii) != sorted(self.radii) or any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive and increasing")

    @property
    def omegas(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.p) / self.p)

    def z(self, r: float) -> complex:
        return r * self.mu


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature parameters.

    ``xi_cutoff=None`` picks the radial cutoff so that the analytic tail
    bound stays below ``1e-13`` of the integral.
    """

    xi_cutoff: float | None = None
    xi_nodes: int = 16
    x_nodes: int = 32
    tail_tol: float = 1e-13


def cone_model(index: RefractionIndex, samples: int = 257) -> ConeModel:
    """Sector hull of ``arg(1 + conj m(x))`` over a radial sample grid.

    Raises
    ------
    FullPlaneConeError
        If the generators leave no angular gap.
    """
    r = np.linspace(0.0, 1.0, samples)
    if index.kind == "absorbing":
        gens = np.full(samples, complex(index.n1))
    else:
        gens = np.atleast_1d(index.generators(r)).astype(complex)
        if gens.size == 1:
            gens = np.full(samples, gens[0])
    if np.any(gens == 0):
        raise FullPlaneConeError("a cone generator vanishes")
    ang = np.sort(np.angle(gens))
    gaps = np.diff(np.r_[ang, ang[0] + 2 * math.pi])
    i = int(np.argmax(gaps))
    if gaps[i] <= 0:
        raise FullPlaneConeError("cone covers the whole plane")
    # the hull is the complement of the largest gap
    t1 = ang[(i + 1) % ang.size]
    t2 = ang[i] if i + 1 < ang.size else ang[i]
    if t2 < t1:
        t2 += 2 * math.pi
    if np.any(np.imag(gens) != 0):
        t1, t2 = t1 - RANGE_PAD, t2 + RANGE_PAD
    return ConeModel((float(t1), float(t2)), gens)


def admissible_mu(mu: complex, p: int, cone: ConeModel, margin: float = ANGLE_MARGIN) -> bool:
    """True iff every ``omega_j mu`` avoids the cone and the positive real axis."""
    mu = complex(mu)
    if abs(abs(mu) - 1.0) > 1e-12:
        raise ValueError("mu must have unit modulus")
    for w in np.exp(2j * np.pi * np.arange(p) / p):
        theta = cmath.phase(w * mu)
        if abs(theta) <= margin or cone.contains_angle(theta, margin):
            return False
    return True


def require_admissible(query: TraceQuery, index: RefractionIndex) -> ConeModel:
    cone = cone_model(index)
    if not admissible_mu(query.mu, query.p, cone):
        raise InadmissibleMuError(f"mu={query.mu} is not admissible for p={query.p}")
    return cone


def _radial_rule(n_nodes: int):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _ball_integral(g, dim: int, n_nodes: int):
    """Integral of a radial function over the unit ball."""
    r, w = _radial_rule(n_nodes)
    return dim * ball_volume(dim) * np.sum(w * g(r) * r ** (dim - 1))


def weyl_alpha(index: RefractionIndex, dim: int = 2, spec: QuadratureSpec | None = None):
    """Weyl coefficient ``alpha`` and a node-doubling error estimate.

    Returns
    -------
    (alpha, error) : tuple of float

    Raises
    ------
    HypothesisViolation
        If the real profile ``n1`` is not strictly positive on the unit disc.
    """
    spec = spec or QuadratureSpec()
    index.validate(weyl=True)
    grid = np.linspace(0.0, 1.0, 1025)
    if np.any(index.real_part_profile(grid) <= 0):
        raise HypothesisViolation("n1 must be positive on the domain")

    def g(r):
        n1 = index.real_part_profile(r)
        return n1 ** (dim / 2) + 1.0

    pref = (2 * math.pi) ** (-dim) * ball_volume(dim)
    a1 = pref * _ball_integral(g, dim, spec.x_nodes)
    a2 = pref * _ball_integral(g, dim, 2 * spec.x_nodes)
    return float(a2), float(abs(a2 - a1))


def _check_xi(p, n):
    if 2 * p <= n:
        raise ValueError(f"xi-integral diverges for 2p={2 * p} <= n={n}")


def xi_integral_closed(b: float, p: int, n: int) -> float:
    """``int_{R^n} (b^p |xi|^{2p} + 1)^{-1} dxi`` in closed form."""
    _check_xi(p, n)
    if b <= 0:
        raise ValueError("b must be positive")
    return n / (2 * p) * b ** (-n / 2) * ball_volume(n) * math.pi / math.sin(n * math.pi / (2 * p))


def xi_integral_general(bp: complex, c: complex, p: int, n: int) -> complex:
    """``int_{R^n} (bp |xi|^{2p} - c)^{-1} dxi`` for ``c / bp`` off ``[0, inf)``.

    Uses ``int_0^inf s^(beta-1) / (s + w) ds = pi w^(beta-1) / sin(pi beta)``
    with ``w = -c / bp`` on the principal branch.
    """
    _check_xi(p, n)
    bp, c = complex(bp), complex(c)
    w = -c / bp
    if w.imag == 0 and w.real <= 0:
        raise InadmissibleMuError("integrand has a real pole")
    beta = n / (2 * p)
    val = math.pi * w ** (beta - 1) / math.sin(math.pi * beta) / bp
    return n * ball_volume(n) / (2 * p) * val


def xi_tail_bound(bp: float, p: int, n: int, cutoff: float, c: complex = -1.0) -> float:
    """Bound on the radial tail beyond ``cutoff`` of the xi-integral.

    For ``rho >= cutoff`` with ``bp cutoff^(2p) >= 2|c|`` the integrand is at
    most ``2 rho^(n-1-2p) / bp``.
    """
    _check_xi(p, n)
    return n * ball_volume(n) * 2.0 * cutoff ** (n - 2 * p) / (abs(bp) * (2 * p - n))


def _xi_radial_quad(bp, c, p, n, spec: QuadratureSpec):
    scale = abs(bp) ** (-1.0 / (2 * p)) * max(1.0, abs(c)) ** (1.0 / (2 * p))
    if spec.xi_cutoff is not None:
        cutoff = spec.xi_cutoff
    else:
        # the tail decays like cutoff^(n - 2p); measure it against the tail at
        # the natural scale, which has the size of the whole integral
        cutoff = scale * spec.tail_tol ** (-1.0 / (2 * p - n))
    while abs(bp) * cutoff ** (2 * p) < 2 * abs(c):
        cutoff *= 2.0
    x, w = np.polynomial.legendre.leggauss(spec.xi_nodes)
    edges = [0.0] + list(scale * 2.0 ** np.arange(-30, int(math.ceil(math.log2(cutoff / scale))) + 1))
    edges[-1] = cutoff
    total = 0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        rho = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * np.sum(w * rho ** (n - 1) / (bp * rho ** (2 * p) - c))
    tail = xi_tail_bound(abs(bp), p, n, cutoff, c)
    return n * ball_volume(n) * total, tail


def xi_integral_quad(b: float, p: int, n: int, spec: QuadratureSpec | None = None):
    """Radial Gauss quadrature of the xi-integral on geometric panels.

    Returns
    -------
    (value, tail_bound) : tuple of float
    """
    _check_xi(p, n)
    spec = spec or QuadratureSpec()
    val, tail = _xi_radial_quad(b ** p, -1.0, p, n, spec)
    return float(val.real), float(tail)


def trace_rhs(query: TraceQuery, index: RefractionIndex, r: float,
              spec: QuadratureSpec | None = None) -> complex:
    """Leading term of the trace identity at ``|z| = r``.

    ``(2 pi)^-n r^(n/2 - p)`` times the x-integral over the unit ball of the
    xi-integrals with ``a(x)^p`` and ``1`` in front of ``|xi|^(2p)``.

    Raises
    ------
    InadmissibleMuError
        If ``mu`` fails :func:`admissible_mu` for the cone of ``index``.
    """
    spec = spec or QuadratureSpec()
    require_admissible(query, index)
    n, p = query.dim, query.p
    c = query.mu ** p
    const = _rhs_constant(index, n, p, c, spec, closed=True)
    return const * r ** (n / 2 - p)


def trace_rhs_quad(query: TraceQuery, index: RefractionIndex, r: float,
                   spec: QuadratureSpec | None = None) -> complex:
    """Same as :func:`trace_rhs` with the xi-integral done by quadrature."""
    spec = spec or QuadratureSpec()
    require_admissible(query, index)
    n, p = query.dim, query.p
    const = _rhs_constant(index, n, p, query.mu ** p, spec, closed=False)
    return const * r ** (n / 2 - p)


def _rhs_constant(index, n, p, c, spec, closed):
    def xi(bp):
        if closed:
            if c == -1 and bp.imag == 0 and bp.real > 0:
                return xi_integral_closed(bp.real ** (1.0 / p), p, n)
            return xi_integral_general(bp, c, p, n)
        return _xi_radial_quad(bp, c, p, n, spec)[0]

    r, w = _radial_rule(spec.x_nodes)
    a_vals = np.atleast_1d(index.a(r)).astype(complex)
    if a_vals.size == 1:
        a_vals = np.full(r.shape, a_vals[0])
    if index.kind == "absorbing":
        a_vals = np.full(r.shape, complex(1.0 / index.n1))
    inner = np.array([xi(complex(av) ** p) for av in a_vals]) + xi(1.0 + 0j)
    integral = n * ball_volume(n) * np.sum(w * inner * r ** (n - 1))
    return complex((2 * math.pi) ** (-n) * integral)


@dataclass(frozen=True)
class StepFunction:
    """Nondecreasing step function ``sigma(lam) = sum of sizes over jumps <= lam``."""

    jumps: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.sizes) < 0):
            raise ValueError("sigma must be nondecreasing (negative jump)")
        if np.any(np.diff(self.jumps) < 0):
            raise ValueError("jump locations must be sorted")

    def __call__(self, lam):
        cum = np.concatenate([[0.0], np.cumsum(self.sizes)])
        return cum[np.searchsorted(self.jumps, lam, side="right")]

    def stieltjes(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([np.sum(self.sizes / (self.jumps + tt)) for tt in t])


def floor_sqrt_sigma(j_max: int = 10 ** 6) -> StepFunction:
    """``sigma(lam) = floor(sqrt(lam))``: unit jumps at the squares."""
    j = np.arange(1, j_max + 1, dtype=float)
    return StepFunction(j * j, np.ones_like(j))


def _stieltjes_continuous(sigma, t):
    # integrate by parts: int d sigma / (lam + t) = int sigma(lam) / (lam + t)^2 dlam
    x, w = np.polynomial.legendre.leggauss(32)
    out = []
    for tt in np.atleast_1d(t):
        edges = tt * 2.0 ** np.arange(-60, 61, 0.5)
        edges = np.r_[0.0, edges]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            lam = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            total += 0.5 * (hi - lo) * np.sum(w * sigma(lam) / (lam + tt) ** 2)
        out.append(total)
    return np.array(out)


@dataclass
class TauberianReport:
    t: np.ndarray
    transform: np.ndarray
    a: float
    a_hat: float
    alpha_hat: float
    karamata: float
    sigma_ratio: np.ndarray
    alpha: float | None = None

    @property
    def a_error(self) -> float:
        return abs(self.a_hat - self.a)

    @property
    def constant_error(self) -> float:
        """Relative gap between ``sigma(t) / t^a`` and the Karamata constant at the largest t."""
        return abs(self.sigma_ratio[-1] / self.karamata - 1.0)

    @property
    def alpha_error(self) -> float:
        return abs(self.alpha_hat / self.alpha - 1.0) if self.alpha else math.nan


def tauberian_check(sigma, a: float, alpha: float | None = None, t_max: float = 1e6,
                    n_grid: int = 9) -> TauberianReport:
    """Check the Karamata tauberian step on a planted ``sigma``.

    The Stieltjes transform ``S(t) = int d sigma / (lam + t)`` is evaluated on
    a geometric grid ending at ``t_max``. The exponent is read from the
    log-log slope at the end of the grid, ``alpha_hat = S(t) t^(1-a)``, and
    ``sigma(t) / t^a`` is compared with ``alpha_hat sin(pi a) / (pi a)``.

    Parameters
    ----------
    sigma : StepFunction or callable
        Nondecreasing with ``sigma(0) = 0``.
    a : float
        Exponent in (0, 1).
    alpha : float, optional
        Expected transform constant, recorded for comparison.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("the exponent a must lie in the open interval (0, 1)")
    t = np.geomspace(t_max / 10 ** 4, t_max, n_grid)
    if isinstance(sigma, StepFunction):
        transform = sigma.stieltjes(t)
    else:
        probe = sigma(np.geomspace(1e-6, 1e3 * t_max, 400))
        if np.any(np.diff(probe) < 0):
            raise ValueError("sigma must be nondecreasing")
        transform = _stieltjes_continuous(sigma, t)
    slope = math.log(transform[-1] / transform[-2]) / math.log(t[-1] / t[-2])
    a_hat = 1.0 + slope
    alpha_hat = float(transform[-1] * t[-1] ** (1.0 - a))
    karamata = alpha_hat * math.sin(math.pi * a) / (math.pi * a)
    ratio = np.asarray(sigma(t), dtype=float) / t ** a
    return TauberianReport(t, transform, a, a_hat, alpha_hat, karamata, ratio, alpha)
