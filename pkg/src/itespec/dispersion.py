"""Per-mode dispersion determinants of the interior transmission problem on the unit disc.

Separating ``w = W(r) e^{im theta}`` and ``v = V(r) e^{im theta}`` turns the
transmission problem into two radial ODEs coupled only through the matching
conditions ``W(1) = V(1)`` and ``W'(1) = V'(1)``. A wavenumber ``k`` is an
eigenvalue of mode ``m`` exactly when the 2x2 matching determinant vanishes.

Two determinants live here:

``det_constant``
    The textbook form ``k sqrt(n) J_m'(k sqrt(n)) J_m(k) - k J_m'(k) J_m(k sqrt(n))``.
``DispersionFn``
    The *reduced* determinant used by the root finder,
    ``D_m(k) = J^_{m+1}(k) J^_m(kappa) - (kappa/k)^2 J^_{m+1}(kappa) J^_m(k)``
    with ``kappa^2 = k^2 n`` and ``J^`` the scaled Bessel function. It equals
    ``det_constant`` divided by ``k^2 (k sqrt(n)/2)^m (k/2)^m / (2 (m+1) m!^2)``,
    a factor with no zeros away from ``k = 0``. ``D_m`` is entire in ``k^2``,
    does not vanish at the origin (``D_m(0) = 1 - n``) and never underflows
    at high order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from itespec import kernels
from itespec.errors import DegenerateIndexError, HypothesisViolation, InvalidIndexError
from itespec.specialfn import besselj, besselj_prime

MIN_STEPS = 64
OVERFLOW_LIMIT = 1e200
DEFAULT_R0 = 1e-3


@dataclass(frozen=True)
class RefractionIndex:
    """Radially symmetric refraction index on the unit disc.

    ``constant``: ``n = n0`` (complex allowed).
    ``radial_polynomial``: ``n(r) = sum_j coeffs[j] r^(2j)`` with real coefficients.
    ``absorbing``: ``n = n1 + i n2 / k`` with real constants.
    """

    kind: str
    n0: complex = 1.0
    coeffs: tuple = ()
    n1: float = 1.0
    n2: float = 0.0
    dim: int = 2
    boundary_width: float = 0.05

    def __post_init__(self):
        if self.kind not in ("constant", "radial_polynomial", "absorbing"):
            raise InvalidIndexError(f"unknown index kind {self.kind!r}")
        if self.kind == "radial_polynomial" and len(self.coeffs) == 0:
            raise InvalidIndexError("radial index needs at least one coefficient")
        if self.dim not in (2, 3):
            raise InvalidIndexError("dimension must be 2 or 3")

    @classmethod
    def constant(cls, n0, **kw):
        return cls("constant", n0=complex(n0), **kw)

    @classmethod
    def radial(cls, coeffs, **kw):
        return cls("radial_polynomial", coeffs=tuple(float(c) for c in coeffs), **kw)

    @classmethod
    def absorbing(cls, n1, n2, **kw):
        return cls("absorbing", n1=float(n1), n2=float(n2), **kw)

    @property
    def is_real(self) -> bool:
        """True when the coefficient is real valued and independent of k."""
        if self.kind == "constant":
            return self.n0.imag == 0.0
        return self.kind == "radial_polynomial"

    @property
    def poly(self) -> np.ndarray:
        """Coefficients in s = r^2 of the k-independent part of n."""
        if self.kind == "constant":
            return np.array([self.n0], dtype=complex)
        if self.kind == "radial_polynomial":
            return np.array(self.coeffs, dtype=complex)
        return np.array([self.n1], dtype=complex)

    def value(self, r, k=None):
        """n(r); for the absorbing family ``k`` selects n1 + i n2/k."""
        s = np.asarray(r, dtype=float) ** 2
        out = np.polynomial.polynomial.polyval(s, self.poly)
        if self.kind == "absorbing" and k is not None:
            out = out + 1j * self.n2 / k
        return out

    def real_part_profile(self, r):
        """n1(r): the profile entering the Weyl constant and the cone."""
        if self.kind == "constant" and self.n0.imag != 0.0:
            raise HypothesisViolation("a complex constant index has no real profile n1")
        return np.real(self.value(r))

    def a(self, r):
        """a(x) = 1/(1 + m(x)), or 1/(1 + m1(x)) for the absorbing family."""
        return 1.0 / self.value(r)

    def generators(self, r):
        """Cone generators 1 + conj(m(x)) along the radius."""
        return np.conj(self.value(r))

    def sup_abs(self) -> float:
        r = np.linspace(0.0, 1.0, 257)
        return float(np.max(np.abs(self.value(r))))

    def spec_string(self) -> str:
        if self.kind == "constant":
            if self.n0.imag == 0.0:
                return f"const:{self.n0.real!r}"
            return f"const:{self.n0.real!r},{self.n0.imag!r}"
        if self.kind == "radial_polynomial":
            return "radial:" + ",".join(repr(c) for c in self.coeffs)
        return f"absorbing:{self.n1!r},{self.n2!r}"

    def validate(self, weyl: bool = False) -> "RefractionIndex":
        """Check the standing hypotheses; return self.

        n must not vanish on [0, 1] and must differ from 1 on the boundary
        annulus ``[1 - boundary_width, 1]``. With ``weyl=True`` the real
        profile must also be strictly positive.
        """
        poly = self.poly
        if _poly_lower_bound(poly, 0.0, 1.0, 0.0) <= 0.0:
            raise InvalidIndexError(f"index {self.spec_string()} vanishes in the disc")
        s_lo = max(0.0, 1.0 - self.boundary_width) ** 2
        if self.kind == "absorbing":
            # n1 = 1 with n2 = 0 is the only degenerate absorbing case
            degenerate = self.n2 == 0.0 and _poly_lower_bound(poly, s_lo, 1.0, 1.0) <= 0.0
        else:
            degenerate = _poly_lower_bound(poly, s_lo, 1.0, 1.0) <= 0.0
        if degenerate:
            raise DegenerateIndexError(
                f"index {self.spec_string()} equals 1 near the boundary; the determinant vanishes identically")
        if weyl:
            if self.kind == "constant" and self.n0.imag != 0.0:
                raise HypothesisViolation("the Weyl law needs a real index or the absorbing family")
            if _real_poly_min_lower(np.real(poly), 0.0, 1.0) <= 0.0:
                raise HypothesisViolation(f"index {self.spec_string()} has n1 <= 0 somewhere")
        return self


def _poly_lower_bound(poly, s_lo, s_hi, target, pad=1e-9, max_level=16):
    """Certified lower bound of ``|p(s) - target|`` on ``[s_lo, s_hi]``.

    Samples plus a Lipschitz correction; refines until the bound is positive
    or the resolution limit is reached. Returns 0 when a root cannot be ruled out.
    """
    poly = np.asarray(poly, dtype=complex).copy()
    poly[0] -= target
    if len(poly) == 1:
        return max(0.0, abs(poly[0]) - pad)
    lip = sum(j * abs(c) for j, c in enumerate(poly)) * max(1.0, s_hi) ** (len(poly) - 2)
    n = 64
    for _ in range(max_level):
        s = np.linspace(s_lo, s_hi, n + 1)
        vals = np.abs(np.polynomial.polynomial.polyval(s, poly))
        if np.min(vals) <= pad:
            return 0.0
        ds = (s_hi - s_lo) / n
        bound = np.min(np.minimum(vals[:-1], vals[1:])) - 0.5 * lip * ds - pad
        if bound > 0:
            return float(bound)
        n *= 2
    return 0.0


def _real_poly_min_lower(poly, s_lo, s_hi, pad=1e-9):
    poly = np.asarray(poly, dtype=float)
    if len(poly) == 1:
        return float(poly[0]) - pad
    lip = sum(j * abs(c) for j, c in enumerate(poly)) * max(1.0, s_hi) ** (len(poly) - 2)
    n = 64
    for _ in range(16):
        s = np.linspace(s_lo, s_hi, n + 1)
        vals = np.polynomial.polynomial.polyval(s, poly)
        bound = np.min(vals) - 0.5 * lip * (s_hi - s_lo) / n - pad
        if bound > 0 or np.min(vals) <= 0:
            return float(bound)
        n *= 2
    return float(bound)


def parse_index(spec: str, validate: bool = True, **kw) -> RefractionIndex:
    """Parse ``const:<re>[,<im>]``, ``radial:<c0>,<c1>,...`` or ``absorbing:<n1>,<n2>``."""
    try:
        kind, _, body = spec.strip().partition(":")
        nums = [float(x) for x in body.split(",")] if body else []
    except ValueError as exc:
        raise InvalidIndexError(f"cannot parse index spec {spec!r}") from exc
    if kind == "const" and len(nums) in (1, 2):
        idx = RefractionIndex.constant(complex(nums[0], nums[1] if len(nums) == 2 else 0.0), **kw)
    elif kind == "radial" and nums:
        idx = RefractionIndex.radial(nums, **kw)
    elif kind == "absorbing" and len(nums) == 2:
        idx = RefractionIndex.absorbing(nums[0], nums[1], **kw)
    else:
        raise InvalidIndexError(f"cannot parse index spec {spec!r}")
    return idx.validate() if validate else idx


def det_constant(m: int, k: complex, n0: complex) -> complex:
    """Matching determinant for a constant index, textbook normalisation."""
    n0 = complex(n0)
    k = complex(k)
    if n0 == 1:
        raise DegenerateIndexError("n0 = 1: w = v solves both equations for every k")
    if n0 == 0:
        raise InvalidIndexError("n0 must be nonzero")
    if k == 0:
        raise ValueError("k must be nonzero")
    ks = k * np.sqrt(n0)
    return ks * besselj_prime(m, ks) * besselj(m, k) - k * besselj_prime(m, k) * besselj(m, ks)


def start_radius(m: int, n_steps: int) -> float:
    """Start of the RK4 leg.

    Keeps ``h (2m+1) / r0 <= 1`` so the stiff ``(2m+1)/r`` term stays inside
    the RK4 stability region; the power series covers ``[0, r0]``.
    """
    return max(DEFAULT_R0, (2.0 * m + 1.0) / (n_steps + 2.0 * m + 1.0))


def _w_coeffs(index: RefractionIndex, k: np.ndarray) -> np.ndarray:
    # q(r) = kappa(k)^2 n-profile, as coefficients in r^2, one row per k
    k2 = (k * k)[:, None]
    coef = k2 * index.poly[None, :]
    if index.kind == "absorbing":
        coef[:, 0] += 1j * k * index.n2
    return coef


def _check_overflow(*arrs):
    for a in arrs:
        if not np.all(np.isfinite(a)) or np.max(np.abs(a), initial=0.0) > OVERFLOW_LIMIT:
            raise OverflowError("radial solution exceeded 1e200; rescale the mode normalisation")


def radial_shoot(m: int, k, index: RefractionIndex, n_steps: int = 512):
    """Boundary data ``(w(1), w'(1), v(1), v'(1))`` from RK4 shooting.

    Both radial equations are integrated from the origin with the regular
    normalisation ``u ~ r^m (1 + O(r^2))``. ``k`` may be an array.
    """
    if index.kind not in ("radial_polynomial", "absorbing"):
        raise ValueError("radial_shoot needs a radial_polynomial or absorbing index")
    if n_steps < MIN_STEPS:
        raise ValueError(f"n_steps must be at least {MIN_STEPS}")
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(k == 0):
        raise ValueError("k must be nonzero")
    r0 = start_radius(m, n_steps)
    yw, dyw = kernels.shoot(m, _w_coeffs(index, k), r0, n_steps)
    yv, dyv = kernels.shoot(m, (k * k)[:, None], r0, n_steps)
    _check_overflow(yw, dyw, yv, dyv)
    # u = r^m y  =>  u(1) = y(1),  u'(1) = m y(1) + y'(1)
    return yw, m * yw + dyw, yv, m * yv + dyv


@dataclass(frozen=True)
class DispersionFn:
    """Reduced dispersion determinant ``k -> D_m(k)`` of one angular mode.

    Calls accept scalars or arrays. For the absorbing family the returned
    value is ``k D_m(k)``, which removes the pole that ``n2/k`` puts at the
    origin.
    """

    index: RefractionIndex
    mode: int
    path: str = "bessel"
    n_steps: int = 512
    phase_rate: float = field(default=1.0, compare=False)

    def __call__(self, k):
        scalar = np.ndim(k) == 0
        kk = np.atleast_1d(np.asarray(k, dtype=complex))
        out = self._eval(kk.ravel()).reshape(kk.shape)
        return complex(out[0]) if scalar else out

    def _eval(self, k):
        m = self.mode
        jk0, jk1, _ = kernels.jhat(m, k)
        if self.path == "bessel":
            if self.index.kind == "absorbing":
                kappa2 = k * k * self.index.n1 + 1j * k * self.index.n2
                ratio_k = k * self.index.n1 + 1j * self.index.n2
            else:
                kappa2 = k * k * self.index.n0
                ratio_k = None
            kap0, kap1, _ = kernels.jhat(m, np.sqrt(kappa2))
            if ratio_k is None:
                return jk1 * kap0 - self.index.n0 * kap1 * jk0
            return k * jk1 * kap0 - ratio_k * kap1 * jk0
        # shooting path: w from RK4, v from the exact Bessel solution
        r0 = start_radius(m, self.n_steps)
        yw, dyw = kernels.shoot(m, _w_coeffs(self.index, k), r0, self.n_steps)
        _check_overflow(yw, dyw)
        k2 = k * k
        with np.errstate(divide="ignore", invalid="ignore"):
            # y_v = J^_m(k r),  y_v'(1) = -k^2/(2(m+1)) J^_{m+1}(k)
            out = 2.0 * (m + 1) / k2 * (jk0 * dyw) + jk1 * yw
        if self.index.kind == "absorbing":
            out = out * k
        return out


def dispersion_fn(index: RefractionIndex, m: int, k_max: float | None = None,
                  n_steps: int | None = None) -> DispersionFn:
    """Evaluator of the reduced determinant for mode ``m``.

    Constant and absorbing indices use the closed Bessel form. Radial
    polynomial profiles use RK4 shooting for ``w``; the step count grows
    with ``k_max`` so the phase error stays small across the search region.
    """
    index.validate()
    if m < 0:
        raise ValueError("mode must be nonnegative")
    sq = math.sqrt(max(1.0, index.sup_abs()))
    rate = 1.0 + sq
    if index.kind == "radial_polynomial" and len(index.coeffs) > 1:
        if n_steps is None:
            n_steps = max(512, int(math.ceil(10.0 * (k_max or 0.0) * sq / 64.0)) * 64)
        return DispersionFn(index, m, "shooting", n_steps, rate)
    if index.kind == "radial_polynomial":
        # a one-term polynomial is a constant index
        index = RefractionIndex.constant(index.coeffs[0], dim=index.dim,
                                         boundary_width=index.boundary_width)
    return DispersionFn(index, m, "bessel", n_steps or 512, rate)


def shooting_fn(index: RefractionIndex, m: int, n_steps: int = 512) -> DispersionFn:
    """Force the shooting path (used to cross-check the closed form)."""
    if index.kind == "constant":
        index = RefractionIndex.radial([index.n0.real], dim=index.dim) if index.n0.imag == 0 else index
    return DispersionFn(index, m, "shooting", n_steps)


def reduced_to_textbook(m: int, k, n: complex, value):
    """Rescale a reduced determinant to the ``det_constant`` normalisation."""
    k = np.asarray(k, dtype=complex)
    ks = k * np.sqrt(complex(n))
    logf = (m * np.log(0.5 * ks) + m * np.log(0.5 * k) - 2 * math.lgamma(m + 1)
            - math.log(2.0 * (m + 1)))
    return value * k * k * np.exp(logf)


def real_roots_bisect(f, a: float, b: float, n_grid: int = 4000, tol: float = 1e-12) -> list[float]:
    """Real roots of a real-valued function on ``(a, b]`` by sign-change scan and bisection."""
    xs = np.linspace(a, b, n_grid + 1)
    vals = np.real(np.asarray(f(xs.astype(complex))))
    roots = []
    for i in range(n_grid):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(xs[i]))
            continue
        if fa * fb < 0:
            lo, hi = xs[i], xs[i + 1]
            flo = fa
            while hi - lo > tol * max(1.0, abs(lo)):
                mid = 0.5 * (lo + hi)
                fm = float(np.real(np.ravel(f(complex(mid)))[0]))
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    return roots
