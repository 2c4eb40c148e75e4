"""Pure numpy implementations of the hot kernels.

Every function here has a twin of the same name and signature in the compiled
``_ckernels`` extension. :mod:`itespec.kernels` picks one at import time.
"""
import math

import numpy as np

SERIES_RADIUS = 12.0
ASYMPTOTIC_RADIUS = 60.0
_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)
_EPS = 1e-17

METHOD_SERIES = 0
METHOD_RECURRENCE = 1
METHOD_ASYMPTOTIC = 2


def select_method(m, az):
    """Evaluation path used for order ``m`` at modulus ``az``."""
    if az <= SERIES_RADIUS or az * az <= 4.0 * (m + 1):
        return METHOD_SERIES
    if az > ASYMPTOTIC_RADIUS and (m + 1) * (m + 1) <= az:
        return METHOD_ASYMPTOTIC
    return METHOD_RECURRENCE


def miller_start(m, az):
    top = max(m + 1.0, az)
    return int(top + 30 + 3.0 * top ** (1.0 / 3.0)) | 1


def _series(m, z):
    # scaled ascending series: sum_k (-z^2/4)^k m! / (k! (m+k)!)
    q = -0.25 * z * z
    term = 1.0 + 0j
    total = 1.0 + 0j
    k = 0
    while True:
        k += 1
        term = term * q / (k * (m + k))
        total += term
        if abs(term) <= _EPS * abs(total) and k > 2:
            return total
        if k > 2000:
            return total


def _hankel(m, z):
    """Unscaled J_m(z) by the large-argument expansion, or None if it stalls."""
    mu = 4.0 * m * m
    zinv = 1.0 / z
    p = 1.0 + 0j
    qq = 0j
    term = 1.0 + 0j
    prev = 1.0
    for k in range(1, 120):
        term = term * (mu - (2 * k - 1) ** 2) * zinv / (8.0 * k)
        mag = abs(term)
        if k % 2 == 1:
            qq += term * (1 if (k // 2) % 2 == 0 else -1)
        else:
            p += term * (1 if (k // 2) % 2 == 0 else -1)
        if mag < 1e-17:
            break
        if mag > prev and k > 2 * m + 2:
            return None
        prev = mag
    else:
        return None
    chi = z - (0.5 * m + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (p * np.cos(chi) - qq * np.sin(chi))


def _log_scale(m, z):
    # log of m! / (z/2)^m
    return math.lgamma(m + 1) - m * np.log(0.5 * z)


def _miller(m, z):
    """Scaled pair (J^_m, J^_{m+1}) for one z in the closed first quadrant."""
    n_start = miller_start(m, abs(z))
    two_over_z = 2.0 / z
    f_next = 0j
    f = 1e-30 + 0j
    norm = 0j
    rescales = 0
    rec_m = rec_m1 = None
    cnt_m = cnt_m1 = 0
    phase = (1, -1j, -1, 1j)
    for k in range(n_start, -1, -1):
        if k == m + 1:
            rec_m1, cnt_m1 = f, rescales
        elif k == m:
            rec_m, cnt_m = f, rescales
        norm += (1.0 if k == 0 else 2.0 * phase[k % 4]) * f
        if k == 0:
            break
        f_prev = k * two_over_z * f - f_next
        f_next, f = f, f_prev
        if abs(f) > _RESCALE:
            f /= _RESCALE
            f_next /= _RESCALE
            norm /= _RESCALE
            rescales += 1
    base = -np.log(norm) - 1j * z
    lm = np.log(rec_m) - (rescales - cnt_m) * _LOG_RESCALE + base
    lm1 = np.log(rec_m1) - (rescales - cnt_m1) * _LOG_RESCALE + base
    s0 = np.exp(lm + _log_scale(m, z))
    s1 = np.exp(lm1 + _log_scale(m + 1, z))
    return s0, s1


def _jhat_scalar(m, z):
    """Scaled pair at a single point, canonicalised to the first quadrant."""
    flip = False
    if z.real < 0:
        z = -z
    if z.imag < 0:
        z = z.conjugate()
        flip = True
    az = abs(z)
    meth = select_method(m, az)
    if meth == METHOD_SERIES:
        s0, s1 = _series(m, z), _series(m + 1, z)
    elif meth == METHOD_ASYMPTOTIC:
        j0, j1 = _hankel(m, z), _hankel(m + 1, z)
        if j0 is None or j1 is None:
            meth = METHOD_RECURRENCE
            s0, s1 = _miller(m, z)
        else:
            s0 = j0 * np.exp(_log_scale(m, z))
            s1 = j1 * np.exp(_log_scale(m + 1, z))
    else:
        s0, s1 = _miller(m, z)
    s0, s1 = complex(s0), complex(s1)
    if flip:
        s0, s1 = s0.conjugate(), s1.conjugate()
    return s0, s1, meth


def jhat(m, z):
    """Scaled Bessel pair ``J^_m(z) = J_m(z) m! (2/z)^m`` and ``J^_{m+1}``.

    Parameters
    ----------
    m : int
        Order, ``0 <= m``.
    z : array_like of complex

    Returns
    -------
    s0, s1 : ndarray of complex128
    method : ndarray of int8
    """
    z = np.ascontiguousarray(z, dtype=np.complex128)
    flat = z.ravel()
    s0 = np.empty_like(flat)
    s1 = np.empty_like(flat)
    meth = np.empty(flat.shape, dtype=np.int8)
    for i, zi in enumerate(flat):
        s0[i], s1[i], meth[i] = _jhat_scalar(int(m), complex(zi))
    return s0.reshape(z.shape), s1.reshape(z.shape), meth.reshape(z.shape)


def _series_start(m, coef, r0):
    """Power series y = sum a_j r^{2j}, a_0 = 1, for the rows of ``coef``."""
    nrow, ncoef = coef.shape
    a_hist = [np.ones(nrow, dtype=np.complex128)]
    r2 = r0 * r0
    y = np.ones(nrow, dtype=np.complex128)
    dy = np.zeros(nrow, dtype=np.complex128)
    rpow = 1.0
    for j in range(1, 600):
        acc = np.zeros(nrow, dtype=np.complex128)
        for i in range(min(ncoef, j)):
            acc += coef[:, i] * a_hist[j - 1 - i]
        a_j = -acc / (4.0 * j * (j + m))
        a_hist.append(a_j)
        rpow *= r2
        ty = a_j * rpow
        y += ty
        dy += 2.0 * j * ty / r0
        if j > 4 and np.all(np.abs(ty) <= _EPS * np.maximum(np.abs(y), 1e-300)):
            # the coefficient convolution reaches back ncoef terms
            tail = [np.abs(a_hist[j - i]) * r2 ** (j - i) for i in range(min(ncoef, j))]
            if np.all(np.max(tail, axis=0) <= _EPS * np.abs(y) + 1e-300):
                break
    return y, dy


def shoot(m, coef, r0, nsteps):
    """Integrate ``y'' + (2m+1)/r y' + q(r) y = 0`` from ``r0`` to 1.

    ``q(r) = sum_j coef[:, j] r^{2j}``; one row of ``coef`` per spectral
    parameter. The start data at ``r0`` is the regular power series with
    ``y(0) = 1``. Classical RK4 with ``nsteps`` uniform steps.

    Returns ``(y(1), y'(1))`` as complex arrays.
    """
    coef = np.ascontiguousarray(np.atleast_2d(coef), dtype=np.complex128)
    y, dy = _series_start(m, coef, r0)
    h = (1.0 - r0) / nsteps
    c = 2.0 * m + 1.0
    ncoef = coef.shape[1]

    def q_at(r):
        r2 = r * r
        acc = coef[:, ncoef - 1].copy()
        for i in range(ncoef - 2, -1, -1):
            acc = acc * r2 + coef[:, i]
        return acc

    # overflow shows up as inf/nan and is reported by the caller
    with np.errstate(over="ignore", invalid="ignore"):
        r = r0
        q0 = q_at(r)
        for _ in range(nsteps):
            qh = q_at(r + 0.5 * h)
            q1 = q_at(r + h)
            k1y = dy
            k1d = -c / r * dy - q0 * y
            y2 = y + 0.5 * h * k1y
            d2 = dy + 0.5 * h * k1d
            k2y = d2
            k2d = -c / (r + 0.5 * h) * d2 - qh * y2
            y3 = y + 0.5 * h * k2y
            d3 = dy + 0.5 * h * k2d
            k3y = d3
            k3d = -c / (r + 0.5 * h) * d3 - qh * y3
            y4 = y + h * k3y
            d4 = dy + h * k3d
            k4y = d4
            k4d = -c / (r + h) * d4 - q1 * y4
            y = y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
            dy = dy + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
            r += h
            q0 = q1
    return y, dy


def band_lu(ab, kl, ku):
    """LU factorisation with partial pivoting of a complex band matrix.

    ``ab`` uses LAPACK ``gbtrf`` storage with ``2*kl + ku + 1`` rows:
    ``A[i, j]`` lives at ``ab[kl + ku + i - j, j]``. Returns the factored
    copy and the pivot vector (0-based row swapped with at each step).
    """
    ab = np.array(ab, dtype=np.complex128, copy=True)
    n = ab.shape[1]
    kv = ku + kl
    piv = np.zeros(n, dtype=np.int64)
    for j in range(n):
        km = min(kl, n - 1 - j)
        col = ab[kv:kv + km + 1, j]
        p = int(np.argmax(np.abs(col)))
        piv[j] = j + p
        if col[p] == 0:
            raise ZeroDivisionError(f"zero pivot in column {j}")
        ju = min(n - 1, j + kv)
        if p != 0:
            for c in range(j, ju + 1):
                a, b = kv + j - c, kv + j + p - c
                ab[a, c], ab[b, c] = ab[b, c], ab[a, c]
        piv_val = ab[kv, j]
        if km > 0:
            ab[kv + 1:kv + km + 1, j] /= piv_val
            for c in range(j + 1, ju + 1):
                u = ab[kv + j - c, c]
                if u != 0:
                    ab[kv + j - c + 1:kv + j - c + km + 1, c] -= ab[kv + 1:kv + km + 1, j] * u
    return ab, piv


def band_solve(lu, piv, kl, ku, b):
    """Solve ``A x = b`` given :func:`band_lu` output; ``b`` is 1-D or 2-D."""
    x = np.array(b, dtype=np.complex128, copy=True)
    n = lu.shape[1]
    kv = ku + kl
    for j in range(n):
        p = piv[j]
        if p != j:
            x[[j, p]] = x[[p, j]]
        km = min(kl, n - 1 - j)
        if km > 0:
            x[j + 1:j + km + 1] -= np.multiply.outer(lu[kv + 1:kv + km + 1, j], x[j]) \
                if x.ndim > 1 else lu[kv + 1:kv + km + 1, j] * x[j]
    for j in range(n - 1, -1, -1):
        x[j] /= lu[kv, j]
        lo = max(0, j - kv)
        if j > lo:
            seg = lu[kv - (j - lo):kv, j]
            if x.ndim > 1:
                x[lo:j] -= np.multiply.outer(seg, x[j])
            else:
                x[lo:j] -= seg * x[j]
    return x
