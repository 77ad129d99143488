# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Faddeeva function, erf Maclaurin series, tridiagonal sweeps.

The numpy twin lives in ``_kernels_py``; both must implement the same
algorithms with the same region constants.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double cabs(double complex)
    double cimag(double complex)
    double creal(double complex)

cnp.import_array()

# keep in sync with _kernels_py
cdef double FAR_RADIUS = 6.0
cdef double CF_MIN_IMAG = 1.0
cdef int FAR_DEPTH = 50
cdef double MID_RADIUS = 8.0
cdef int MID_DEPTH = 20
cdef double OUTER_RADIUS = 14.0
cdef int OUTER_DEPTH = 12
cdef int NEAR_DEPTH = 160
cdef int SERIES_MAX_TERMS = 600
cdef double INV_SQRT_PI = 0.56418958354775628695
cdef double TWO_OVER_SQRT_PI = 1.1283791670955125739


cdef inline double complex _erf_series(double complex z) noexcept nogil:
    cdef double zr = creal(z), zi = cimag(z)
    # m = -z^2
    cdef double mr = zi * zi - zr * zr, mi = -2.0 * zr * zi
    cdef double tr = zr, ti = zi, sr = zr, si = zi, nr, cr, ci
    cdef double r2 = zr * zr + zi * zi
    cdef int n = 0
    while n < SERIES_MAX_TERMS:
        n += 1
        nr = (tr * mr - ti * mi) / n
        ti = (tr * mi + ti * mr) / n
        tr = nr
        cr = tr / (2 * n + 1)
        ci = ti / (2 * n + 1)
        sr += cr
        si += ci
        if n > r2 and cr * cr + ci * ci <= 1e-34 * (sr * sr + si * si):
            break
    return TWO_OVER_SQRT_PI * (sr + 1j * si)


DEF BLOCK = 64


cdef void _cf_block(const double* zr, const double* zi, int m, int depth,
                    double* outr, double* outi) noexcept nogil:
    # backward Laplace continued fraction for m <= BLOCK points at once;
    # the inner loop over points is independent so divisions pipeline
    cdef double tr[BLOCK]
    cdef double ti[BLOCK]
    cdef double dr, di, k
    cdef int n, j
    for j in range(m):
        tr[j] = 0.0
        ti[j] = 0.0
    for n in range(depth, 0, -1):
        for j in range(m):
            dr = zr[j] - tr[j]
            di = zi[j] - ti[j]
            k = 0.5 * n / (dr * dr + di * di)
            tr[j] = k * dr
            ti[j] = -k * di
    for j in range(m):
        dr = zr[j] - tr[j]
        di = zi[j] - ti[j]
        k = INV_SQRT_PI / (dr * dr + di * di)
        # i / (dr + i di) = (di + i dr) / |d|^2
        outr[j] = k * di
        outi[j] = k * dr


cdef int _region(double zr, double zi) noexcept nogil:
    cdef double r = sqrt(zr * zr + zi * zi)
    if r >= OUTER_RADIUS:
        return OUTER_DEPTH
    if r >= MID_RADIUS:
        return MID_DEPTH
    if r >= FAR_RADIUS:
        return FAR_DEPTH
    if zi >= CF_MIN_IMAG:
        return NEAR_DEPTH
    return 0


def faddeeva(const double complex[::1] z):
    """Faddeeva function w(z) = exp(-z^2) erfc(-iz), elementwise."""
    cdef Py_ssize_t i, n = z.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    ur_arr = np.empty(n)
    ui_arr = np.empty(n)
    depth_arr = np.empty(n, dtype=np.int32)
    order_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] ur = ur_arr
    cdef double[::1] ui = ui_arr
    cdef int[::1] dep = depth_arr
    cdef Py_ssize_t[::1] order = order_arr
    cdef double br[BLOCK]
    cdef double bi[BLOCK]
    cdef double rr[BLOCK]
    cdef double ri[BLOCK]
    cdef double complex zz, wz
    cdef Py_ssize_t start, stop, j, cnt
    cdef int d, cls
    cdef int[5] depths
    depths[0] = OUTER_DEPTH
    depths[1] = MID_DEPTH
    depths[2] = FAR_DEPTH
    depths[3] = NEAR_DEPTH
    depths[4] = 0
    with nogil:
        # fold into the upper half-plane and classify
        for i in range(n):
            zz = z[i]
            if cimag(zz) < 0:
                zz = -zz
            ur[i] = creal(zz)
            ui[i] = cimag(zz)
            dep[i] = _region(ur[i], ui[i])
        for cls in range(5):
            d = depths[cls]
            cnt = 0
            for i in range(n):
                if dep[i] == d:
                    order[cnt] = i
                    cnt += 1
            if d == 0:
                for j in range(cnt):
                    i = order[j]
                    zz = ur[i] + 1j * ui[i]
                    o[i] = cexp(-zz * zz) * (1.0 - _erf_series(-1j * zz))
                continue
            start = 0
            while start < cnt:
                stop = start + BLOCK
                if stop > cnt:
                    stop = cnt
                for j in range(stop - start):
                    i = order[start + j]
                    br[j] = ur[i]
                    bi[j] = ui[i]
                _cf_block(br, bi, <int>(stop - start), d, rr, ri)
                for j in range(stop - start):
                    o[order[start + j]] = rr[j] + 1j * ri[j]
                start = stop
        # reflection w(z) = 2 exp(-z^2) - w(-z) for Im z < 0
        for i in range(n):
            zz = z[i]
            if cimag(zz) < 0:
                o[i] = 2.0 * cexp(-zz * zz) - o[i]
    return out


def erf_series(const double complex[::1] z):
    """Maclaurin series of erf, elementwise."""
    cdef Py_ssize_t i, n = z.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _erf_series(z[i])
    return out


def tridiag_factor(const double complex[::1] diag, double complex off):
    """LU sweep coefficients of tri(off, diag, off) with a constant off-diagonal."""
    cdef Py_ssize_t i, n = diag.shape[0]
    cp = np.empty(n, dtype=np.complex128)
    inv_piv = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] c = cp
    cdef double complex[::1] p = inv_piv
    p[0] = 1.0 / diag[0]
    c[0] = off * p[0]
    for i in range(1, n):
        p[i] = 1.0 / (diag[i] - off * c[i - 1])
        c[i] = off * p[i]
    return cp, inv_piv


def tridiag_solve(double complex off, const double complex[::1] cp,
                  const double complex[::1] inv_piv, double complex[::1] rhs):
    """Solve in place using precomputed sweep coefficients."""
    cdef Py_ssize_t i, n = rhs.shape[0]
    # real arithmetic with the running value kept in locals: the recurrence
    # is latency bound and memoryview aliasing would force reloads
    cdef double orr = creal(off), oi = cimag(off)
    cdef double pr, pi_, qr, qi, ar, ai
    with nogil:
        qr = creal(rhs[0])
        qi = cimag(rhs[0])
        ar = creal(inv_piv[0])
        ai = cimag(inv_piv[0])
        pr = qr * ar - qi * ai
        pi_ = qr * ai + qi * ar
        rhs[0] = pr + 1j * pi_
        for i in range(1, n):
            qr = creal(rhs[i]) - (orr * pr - oi * pi_)
            qi = cimag(rhs[i]) - (orr * pi_ + oi * pr)
            ar = creal(inv_piv[i])
            ai = cimag(inv_piv[i])
            pr = qr * ar - qi * ai
            pi_ = qr * ai + qi * ar
            rhs[i] = pr + 1j * pi_
        for i in range(n - 2, -1, -1):
            ar = creal(cp[i])
            ai = cimag(cp[i])
            qr = creal(rhs[i]) - (ar * pr - ai * pi_)
            qi = cimag(rhs[i]) - (ar * pi_ + ai * pr)
            pr = qr
            pi_ = qi
            rhs[i] = pr + 1j * pi_


def tridiag_matvec(double complex diag, double complex off,
                   const double complex[::1] x, double complex[::1] out):
    """out = tri(off, diag, off) @ x with zero values beyond both ends."""
    cdef Py_ssize_t i, n = x.shape[0]
    if n == 1:
        out[0] = diag * x[0]
        return
    with nogil:
        out[0] = diag * x[0] + off * x[1]
        for i in range(1, n - 1):
            out[i] = diag * x[i] + off * (x[i - 1] + x[i + 1])
        out[n - 1] = diag * x[n - 1] + off * x[n - 2]
