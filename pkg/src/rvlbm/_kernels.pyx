# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: fused collide-and-stream, and batched 4x4 spectral radii.

The pure-numpy twins of these functions live in ``_fallback.py`` and share
their signatures exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, INFINITY, NAN
from scipy.linalg.cython_lapack cimport zlahqr

cnp.import_array()

ctypedef double complex cplx


def spot_run(double[:, :, ::1] f, double[:, ::1] C, long long[:, ::1] shifts,
             int n_steps, double limit):
    """Advance ``f`` (shape (4, ny, nx)) by up to ``n_steps`` steps in place.

    Returns ``(steps_done, blowup_step, rho_min, rho_max)`` where
    ``blowup_step`` is -1 when every visited state satisfied
    ``|rho| <= limit`` (non-finite values count as a blow-up).
    """
    cdef Py_ssize_t ny = f.shape[1], nx = f.shape[2]
    cdef Py_ssize_t x, y, j, t
    cdef double[:, :, ::1] g = np.empty_like(np.asarray(f))
    cdef double[:, :, ::1] src = f
    cdef double[:, :, ::1] dst = g
    cdef double[:, :, ::1] tmp
    cdef long long[:, ::1] xdst = np.empty((4, nx), dtype=np.int64)
    cdef long long[:, ::1] ydst = np.empty((4, ny), dtype=np.int64)
    cdef double c00 = C[0, 0], c01 = C[0, 1], c02 = C[0, 2], c03 = C[0, 3]
    cdef double c10 = C[1, 0], c11 = C[1, 1], c12 = C[1, 2], c13 = C[1, 3]
    cdef double c20 = C[2, 0], c21 = C[2, 1], c22 = C[2, 2], c23 = C[2, 3]
    cdef double c30 = C[3, 0], c31 = C[3, 1], c32 = C[3, 2], c33 = C[3, 3]
    cdef double f0, f1, f2, f3, r, rmin, rmax
    cdef int bad = 0
    cdef Py_ssize_t steps_done = 0, blowup = -1

    if f.shape[0] != 4:
        raise ValueError("f must have shape (4, ny, nx)")
    for j in range(4):
        for x in range(nx):
            xdst[j, x] = (x + shifts[j, 0]) % nx
            if xdst[j, x] < 0:
                xdst[j, x] += nx
        for y in range(ny):
            ydst[j, y] = (y + shifts[j, 1]) % ny
            if ydst[j, y] < 0:
                ydst[j, y] += ny

    with nogil:
        for t in range(n_steps + 1):
            rmin = INFINITY
            rmax = -INFINITY
            bad = 0
            if t == n_steps:
                # final state: diagnostics only
                for y in range(ny):
                    for x in range(nx):
                        r = src[0, y, x] + src[1, y, x] + src[2, y, x] + src[3, y, x]
                        if not (fabs(r) <= limit):
                            bad = 1
                        if r < rmin:
                            rmin = r
                        if r > rmax:
                            rmax = r
                if bad and t > 0:
                    blowup = t
                steps_done = t
                break
            for y in range(ny):
                for x in range(nx):
                    f0 = src[0, y, x]
                    f1 = src[1, y, x]
                    f2 = src[2, y, x]
                    f3 = src[3, y, x]
                    r = f0 + f1 + f2 + f3
                    if not (fabs(r) <= limit):
                        bad = 1
                    if r < rmin:
                        rmin = r
                    if r > rmax:
                        rmax = r
                    dst[0, ydst[0, y], xdst[0, x]] = c00 * f0 + c01 * f1 + c02 * f2 + c03 * f3
                    dst[1, ydst[1, y], xdst[1, x]] = c10 * f0 + c11 * f1 + c12 * f2 + c13 * f3
                    dst[2, ydst[2, y], xdst[2, x]] = c20 * f0 + c21 * f1 + c22 * f2 + c23 * f3
                    dst[3, ydst[3, y], xdst[3, x]] = c30 * f0 + c31 * f1 + c32 * f2 + c33 * f3
            if bad and t > 0:
                # the state reached after t steps is already broken
                blowup = t
                steps_done = t
                break
            tmp = src
            src = dst
            dst = tmp

    # src holds the latest state; copy it back when it lives in the scratch buffer
    if &src[0, 0, 0] != &f[0, 0, 0]:
        f[:, :, :] = src
    return int(steps_done), int(blowup), float(rmin), float(rmax)


cdef inline double cabs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef int hessenberg4(cplx *h) noexcept nogil:
    """Householder reduction of a column-major 4x4 matrix to upper Hessenberg form."""
    cdef int k, i, j
    cdef double xnorm, a0, vnorm2
    cdef cplx alpha, s, v[4]
    for k in range(2):
        xnorm = 0.0
        for i in range(k + 1, 4):
            xnorm += cabs2(h[i + 4 * k])
        xnorm = sqrt(xnorm)
        if xnorm == 0.0:
            continue
        a0 = sqrt(cabs2(h[k + 1 + 4 * k]))
        if a0 == 0.0:
            alpha = -xnorm
        else:
            alpha = -(h[k + 1 + 4 * k] / a0) * xnorm
        for i in range(4):
            v[i] = 0
        for i in range(k + 1, 4):
            v[i] = h[i + 4 * k]
        v[k + 1] = v[k + 1] - alpha
        vnorm2 = 0.0
        for i in range(k + 1, 4):
            vnorm2 += cabs2(v[i])
        if vnorm2 == 0.0:
            continue
        # H <- (I - 2 v v^H / |v|^2) H
        for j in range(4):
            s = 0
            for i in range(k + 1, 4):
                s = s + v[i].conjugate() * h[i + 4 * j]
            s = 2.0 * s / vnorm2
            for i in range(k + 1, 4):
                h[i + 4 * j] = h[i + 4 * j] - v[i] * s
        # H <- H (I - 2 v v^H / |v|^2)
        for i in range(4):
            s = 0
            for j in range(k + 1, 4):
                s = s + h[i + 4 * j] * v[j]
            s = 2.0 * s / vnorm2
            for j in range(k + 1, 4):
                h[i + 4 * j] = h[i + 4 * j] - s * v[j].conjugate()
        for i in range(k + 2, 4):
            h[i + 4 * k] = 0
    return 0


cdef double radius4(cplx *h) noexcept nogil:
    """Spectral radius of a column-major 4x4 complex matrix (destroys ``h``).

    Returns -1 if the QR iteration fails to converge.
    """
    cdef bint wantt = 0, wantz = 0
    cdef int n = 4, ilo = 1, ihi = 4, ldh = 4, iloz = 1, ihiz = 4, ldz = 1, info = 0
    cdef cplx w[4]
    cdef cplx zdummy[1]
    cdef double r = 0.0, a
    cdef int i
    hessenberg4(h)
    zlahqr(&wantt, &wantz, &n, &ilo, &ihi, h, &ldh, w, &iloz, &ihiz, zdummy, &ldz, &info)
    if info != 0:
        return -1.0
    for i in range(4):
        a = cabs2(w[i])
        if a > r:
            r = a
    return sqrt(r)


def spectral_radii(cplx[:, :, ::1] mats):
    """Spectral radius of each matrix in an ``(n, 4, 4)`` stack (NaN on failure)."""
    cdef Py_ssize_t n = mats.shape[0], m, i, j
    cdef cplx h[16]
    cdef double r
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for m in range(n):
            for i in range(4):
                for j in range(4):
                    h[i + 4 * j] = mats[m, i, j]
            r = radius4(h)
            o[m] = r if r >= 0.0 else NAN
    return out


def max_spectral_radius(double[:, :, ::1] C, cplx[:, ::1] a):
    """``max_k r(diag(a[k]) C[v])`` for each ``v``.

    ``C`` is ``(nv, 4, 4)``, ``a`` is ``(nk, 4)`` holding the transport phase
    factors. Returns ``(radii, failures)``; failures counts QR breakdowns
    (those k are skipped).
    """
    cdef Py_ssize_t nv = C.shape[0], nk = a.shape[0], v, k, i, j
    cdef cplx h[16]
    cdef double r, best
    cdef long long fails = 0
    out = np.empty(nv)
    cdef double[::1] o = out
    with nogil:
        for v in range(nv):
            best = 0.0
            for k in range(nk):
                for i in range(4):
                    for j in range(4):
                        h[i + 4 * j] = a[k, i] * C[v, i, j]
                r = radius4(h)
                if r < 0.0:
                    fails += 1
                elif r > best:
                    best = r
            o[v] = best
    return out, int(fails)
