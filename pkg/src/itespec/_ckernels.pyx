# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same signatures and semantics as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, lgamma, log, M_PI, pow, cbrt

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double complex csqrt(double complex)
    double complex ccos(double complex)
    double complex csin(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)

cnp.import_array()

cdef double SERIES_RADIUS = 12.0
cdef double ASYMPTOTIC_RADIUS = 60.0
cdef double RESCALE = 1e250
cdef double EPS = 1e-17
cdef double complex I1 = 1j


cdef inline int select_method(int m, double az) nogil:
    if az <= SERIES_RADIUS or az * az <= 4.0 * (m + 1):
        return 0
    if az > ASYMPTOTIC_RADIUS and (m + 1.0) * (m + 1.0) <= az:
        return 2
    return 1


cdef inline int miller_start(int m, double az) nogil:
    cdef double top = m + 1.0
    if az > top:
        top = az
    return (<int>(top + 30 + 3.0 * cbrt(top))) | 1


cdef double complex series(int m, double complex z) nogil:
    cdef double complex q = -0.25 * z * z
    cdef double complex term = 1.0
    cdef double complex total = 1.0
    cdef int k = 0
    while True:
        k += 1
        term = term * q / (k * (m + k))
        total = total + term
        if (cabs(term) <= EPS * cabs(total) and k > 2) or k > 2000:
            return total


cdef int hankel(int m, double complex z, double complex *out) nogil:
    cdef double mu = 4.0 * m * m
    cdef double complex zinv = 1.0 / z
    cdef double complex p = 1.0
    cdef double complex qq = 0.0
    cdef double complex term = 1.0
    cdef double prev = 1.0, mag, sgn
    cdef int k
    cdef bint ok = False
    for k in range(1, 120):
        term = term * (mu - (2 * k - 1) * (2 * k - 1)) * zinv / (8.0 * k)
        mag = cabs(term)
        sgn = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 1:
            qq = qq + sgn * term
        else:
            p = p + sgn * term
        if mag < 1e-17:
            ok = True
            break
        if mag > prev and k > 2 * m + 2:
            return 0
        prev = mag
    if not ok:
        return 0
    cdef double complex chi = z - (0.5 * m + 0.25) * M_PI
    out[0] = csqrt(2.0 / (M_PI * z)) * (p * ccos(chi) - qq * csin(chi))
    return 1


cdef inline double complex log_scale(int m, double complex z) nogil:
    return lgamma(m + 1.0) - m * clog(0.5 * z)


cdef void miller(int m, double complex z, double complex *s0, double complex *s1) nogil:
    cdef int n_start = miller_start(m, cabs(z))
    cdef double complex two_over_z = 2.0 / z
    cdef double complex f_next = 0.0, f = 1e-30, f_prev, norm = 0.0, coef
    cdef double complex rec_m = 0.0, rec_m1 = 0.0
    cdef int rescales = 0, cnt_m = 0, cnt_m1 = 0, k, r4
    cdef double lres = log(RESCALE)
    k = n_start
    while k >= 0:
        if k == m + 1:
            rec_m1 = f
            cnt_m1 = rescales
        elif k == m:
            rec_m = f
            cnt_m = rescales
        if k == 0:
            norm = norm + f
            break
        r4 = k % 4
        if r4 == 0:
            coef = 2.0
        elif r4 == 1:
            coef = -2.0 * I1
        elif r4 == 2:
            coef = -2.0
        else:
            coef = 2.0 * I1
        norm = norm + coef * f
        f_prev = k * two_over_z * f - f_next
        f_next = f
        f = f_prev
        if cabs(f) > RESCALE:
            f = f / RESCALE
            f_next = f_next / RESCALE
            norm = norm / RESCALE
            rescales += 1
        k -= 1
    cdef double complex base = -clog(norm) - I1 * z
    s0[0] = cexp(clog(rec_m) - (rescales - cnt_m) * lres + base + log_scale(m, z))
    s1[0] = cexp(clog(rec_m1) - (rescales - cnt_m1) * lres + base + log_scale(m + 1, z))


cdef int jhat_point(int m, double complex z, double complex *s0, double complex *s1) nogil:
    cdef bint flip = False
    cdef double complex j0, j1
    if creal(z) < 0:
        z = -z
    if cimag(z) < 0:
        z = conj(z)
        flip = True
    cdef int meth = select_method(m, cabs(z))
    if meth == 0:
        s0[0] = series(m, z)
        s1[0] = series(m + 1, z)
    elif meth == 2:
        if hankel(m, z, &j0) and hankel(m + 1, z, &j1):
            s0[0] = j0 * cexp(log_scale(m, z))
            s1[0] = j1 * cexp(log_scale(m + 1, z))
        else:
            meth = 1
            miller(m, z, s0, s1)
    else:
        miller(m, z, s0, s1)
    if flip:
        s0[0] = conj(s0[0])
        s1[0] = conj(s1[0])
    return meth


def jhat(int m, z):
    """Scaled Bessel pair ``J^_m(z)``, ``J^_{m+1}(z)`` and the method codes."""
    zz = np.ascontiguousarray(z, dtype=np.complex128)
    cdef double complex[::1] flat = zz.reshape(-1)
    cdef Py_ssize_t n = flat.shape[0], i
    out0 = np.empty(n, dtype=np.complex128)
    out1 = np.empty(n, dtype=np.complex128)
    meth = np.empty(n, dtype=np.int8)
    cdef double complex[::1] o0 = out0
    cdef double complex[::1] o1 = out1
    cdef signed char[::1] mm = meth
    with nogil:
        for i in range(n):
            mm[i] = jhat_point(m, flat[i], &o0[i], &o1[i])
    return out0.reshape(zz.shape), out1.reshape(zz.shape), meth.reshape(zz.shape)


cdef void series_start(int m, double complex *coef, int ncoef, double r0,
                       double complex *a, int amax,
                       double complex *y_out, double complex *dy_out) nogil:
    cdef double r2 = r0 * r0, rpow = 1.0, tail
    cdef double complex y = 1.0, dy = 0.0, acc, ty
    cdef int j, i, lim
    a[0] = 1.0
    for j in range(1, amax):
        acc = 0.0
        lim = ncoef if ncoef < j else j
        for i in range(lim):
            acc = acc + coef[i] * a[j - 1 - i]
        a[j] = -acc / (4.0 * j * (j + m))
        rpow = rpow * r2
        ty = a[j] * rpow
        y = y + ty
        dy = dy + 2.0 * j * ty / r0
        if j > 4 and cabs(ty) <= EPS * cabs(y):
            tail = 0.0
            for i in range(lim):
                if cabs(a[j - i]) * pow(r2, j - i) > tail:
                    tail = cabs(a[j - i]) * pow(r2, j - i)
            if tail <= EPS * cabs(y) + 1e-300:
                break
    y_out[0] = y
    dy_out[0] = dy


cdef inline double complex q_at(double complex *coef, int ncoef, double r) nogil:
    cdef double r2 = r * r
    cdef double complex acc = coef[ncoef - 1]
    cdef int i
    for i in range(ncoef - 2, -1, -1):
        acc = acc * r2 + coef[i]
    return acc


def shoot(int m, coef, double r0, int nsteps):
    """RK4 radial integration; see ``_pykernels.shoot``."""
    cc = np.ascontiguousarray(np.atleast_2d(coef), dtype=np.complex128)
    cdef double complex[:, ::1] cv = cc
    cdef Py_ssize_t nrow = cv.shape[0], row
    cdef int ncoef = cv.shape[1], s
    out_y = np.empty(nrow, dtype=np.complex128)
    out_d = np.empty(nrow, dtype=np.complex128)
    cdef double complex[::1] oy = out_y
    cdef double complex[::1] od = out_d
    abuf = np.empty(600, dtype=np.complex128)
    cdef double complex[::1] av = abuf
    cdef double h = (1.0 - r0) / nsteps, c = 2.0 * m + 1.0, r, rh
    cdef double complex y, dy, q0, qh, q1
    cdef double complex k1y, k1d, k2y, k2d, k3y, k3d, k4y, k4d, y2, d2, y3, d3, y4, d4
    with nogil:
        for row in range(nrow):
            series_start(m, &cv[row, 0], ncoef, r0, &av[0], 600, &y, &dy)
            r = r0
            q0 = q_at(&cv[row, 0], ncoef, r)
            for s in range(nsteps):
                rh = r + 0.5 * h
                qh = q_at(&cv[row, 0], ncoef, rh)
                q1 = q_at(&cv[row, 0], ncoef, r + h)
                k1y = dy
                k1d = -c / r * dy - q0 * y
                y2 = y + 0.5 * h * k1y
                d2 = dy + 0.5 * h * k1d
                k2y = d2
                k2d = -c / rh * d2 - qh * y2
                y3 = y + 0.5 * h * k2y
                d3 = dy + 0.5 * h * k2d
                k3y = d3
                k3d = -c / rh * d3 - qh * y3
                y4 = y + h * k3y
                d4 = dy + h * k3d
                k4y = d4
                k4d = -c / (r + h) * d4 - q1 * y4
                y = y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
                dy = dy + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
                r = r + h
                q0 = q1
            oy[row] = y
            od[row] = dy
    return out_y, out_d


def band_lu(ab, int kl, int ku):
    """Banded LU with partial pivoting (LAPACK gbtrf storage)."""
    lu = np.array(ab, dtype=np.complex128, copy=True, order="C")
    cdef double complex[:, ::1] a = lu
    cdef Py_ssize_t n = a.shape[1]
    cdef int kv = ku + kl
    piv = np.zeros(n, dtype=np.int64)
    cdef long long[::1] pv = piv
    cdef Py_ssize_t j, c, i, km, ju, p
    cdef double best, mag
    cdef double complex tmp, pval, u
    cdef Py_ssize_t bad = -1
    with nogil:
        for j in range(n):
            km = kl if kl < n - 1 - j else n - 1 - j
            p = 0
            best = cabs(a[kv, j])
            for i in range(1, km + 1):
                mag = cabs(a[kv + i, j])
                if mag > best:
                    best = mag
                    p = i
            pv[j] = j + p
            if best == 0.0:
                bad = j
                break
            ju = j + kv if j + kv < n - 1 else n - 1
            if p != 0:
                for c in range(j, ju + 1):
                    tmp = a[kv + j - c, c]
                    a[kv + j - c, c] = a[kv + j + p - c, c]
                    a[kv + j + p - c, c] = tmp
            pval = a[kv, j]
            for i in range(1, km + 1):
                a[kv + i, j] = a[kv + i, j] / pval
            for c in range(j + 1, ju + 1):
                u = a[kv + j - c, c]
                if u != 0:
                    for i in range(1, km + 1):
                        a[kv + j - c + i, c] = a[kv + j - c + i, c] - a[kv + i, j] * u
    if bad >= 0:
        raise ZeroDivisionError(f"zero pivot in column {bad}")
    return lu, piv


def band_solve(lu, piv, int kl, int ku, b):
    """Solve with :func:`band_lu` factors; ``b`` is 1-D or 2-D (n, nrhs)."""
    x = np.array(b, dtype=np.complex128, copy=True, order="C")
    squeeze = x.ndim == 1
    if squeeze:
        x = x.reshape(-1, 1)
    cdef double complex[:, ::1] xv = x
    cdef double complex[:, ::1] a = np.ascontiguousarray(lu, dtype=np.complex128)
    cdef long long[::1] pv = np.ascontiguousarray(piv, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[1], nr = xv.shape[1], j, i, c, km, lo, p
    cdef int kv = ku + kl
    cdef double complex tmp, xj
    with nogil:
        for j in range(n):
            p = pv[j]
            if p != j:
                for c in range(nr):
                    tmp = xv[j, c]
                    xv[j, c] = xv[p, c]
                    xv[p, c] = tmp
            km = kl if kl < n - 1 - j else n - 1 - j
            for i in range(1, km + 1):
                for c in range(nr):
                    xv[j + i, c] = xv[j + i, c] - a[kv + i, j] * xv[j, c]
        for j in range(n - 1, -1, -1):
            for c in range(nr):
                xv[j, c] = xv[j, c] / a[kv, j]
            lo = j - kv if j - kv > 0 else 0
            for i in range(lo, j):
                for c in range(nr):
                    xv[i, c] = xv[i, c] - a[kv - (j - i), j] * xv[j, c]
    if squeeze:
        return x.reshape(-1)
    return x
