# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled barotropic substepping and batched tridiagonal kernels.

Same stencils and stage arithmetic as ``_pykernels``; loops are fused so one
forward-Euler stage is a single sweep over the grid.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


cdef void _fluxes(double[:, ::1] u, double[:, ::1] v, double[:, ::1] z,
                  const double[:, ::1] H, double[:, ::1] fu, double[:, ::1] fv,
                  Py_ssize_t ny, Py_ssize_t nx, bint channel) noexcept nogil:
    cdef Py_ssize_t j, i, im, jm
    for j in range(ny):
        for i in range(nx):
            im = i - 1 if i > 0 else nx - 1
            fu[j, i] = u[j, i] * 0.5 * (z[j, i] + H[j, i] + z[j, im] + H[j, im])
    if channel:
        for i in range(nx):
            fv[0, i] = 0.0
            fv[ny, i] = 0.0
        for j in range(1, ny):
            for i in range(nx):
                fv[j, i] = v[j, i] * 0.5 * (z[j, i] + H[j, i] + z[j - 1, i] + H[j - 1, i])
    else:
        for j in range(ny):
            jm = j - 1 if j > 0 else ny - 1
            for i in range(nx):
                fv[j, i] = v[j, i] * 0.5 * (z[j, i] + H[j, i] + z[jm, i] + H[jm, i])


cdef void _euler(double[:, ::1] u, double[:, ::1] v, double[:, ::1] z,
                 double[:, ::1] fu, double[:, ::1] fv,
                 const double[:, ::1] Gu, const double[:, ::1] Gv,
                 double f, double g, double tau, double dx, double dy,
                 double[:, ::1] ou, double[:, ::1] ov, double[:, ::1] oz,
                 Py_ssize_t ny, Py_ssize_t nx, bint channel) noexcept nogil:
    """One forward-Euler stage of the barotropic subsystem; fluxes precomputed."""
    cdef Py_ssize_t j, i, im, ip, jm, jn, j0, j1
    cdef double vb, ub
    for j in range(ny):
        jn = j + 1 if (channel or j < ny - 1) else 0
        for i in range(nx):
            im = i - 1 if i > 0 else nx - 1
            ip = i + 1 if i < nx - 1 else 0
            vb = 0.25 * (v[j, im] + v[j, i] + v[jn, im] + v[jn, i])
            ou[j, i] = u[j, i] + tau * (Gu[j, i] + f * vb - g * (z[j, i] - z[j, im]) / dx)
            oz[j, i] = z[j, i] - tau * ((fu[j, ip] - fu[j, i]) / dx + (fv[jn, i] - fv[j, i]) / dy)
    if channel:
        j0 = 1
        j1 = ny
        for i in range(nx):
            ov[0, i] = 0.0
            ov[ny, i] = 0.0
    else:
        j0 = 0
        j1 = ny
    for j in range(j0, j1):
        jm = j - 1 if j > 0 else ny - 1
        for i in range(nx):
            ip = i + 1 if i < nx - 1 else 0
            ub = 0.25 * (u[jm, i] + u[jm, ip] + u[j, i] + u[j, ip])
            ov[j, i] = v[j, i] + tau * (Gv[j, i] - f * ub - g * (z[j, i] - z[jm, i]) / dy)


cdef bint _all_finite(double[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t j, i
    for j in range(a.shape[0]):
        for i in range(a.shape[1]):
            if not isfinite(a[j, i]):
                return False
    return True


def substep(int order, u0, v0, z0, H, Gu, Gv, double f, double g, double dt,
            int M, double dx, double dy, bint channel):
    """Run ``M`` SSPRK substeps; returns (u, v, zeta, acc_u, acc_v, bad_substep).

    ``bad_substep`` is 0 on success, otherwise the 1-based substep at which a
    non-finite value appeared.
    """
    cdef Py_ssize_t ny = z0.shape[0], nx = z0.shape[1]
    cdef Py_ssize_t nyv = v0.shape[0]
    cdef double tau = dt / M
    cdef double[:, ::1] u = np.array(u0, dtype=np.float64, order="C")
    cdef double[:, ::1] v = np.array(v0, dtype=np.float64, order="C")
    cdef double[:, ::1] z = np.array(z0, dtype=np.float64, order="C")
    cdef const double[:, ::1] Hm = np.ascontiguousarray(H, dtype=np.float64)
    cdef const double[:, ::1] Gum = np.ascontiguousarray(Gu, dtype=np.float64)
    cdef const double[:, ::1] Gvm = np.ascontiguousarray(Gv, dtype=np.float64)
    cdef double[:, ::1] u1 = np.empty((ny, nx)), v1 = np.empty((nyv, nx)), z1 = np.empty((ny, nx))
    cdef double[:, ::1] u2 = np.empty((ny, nx)), v2 = np.empty((nyv, nx)), z2 = np.empty((ny, nx))
    cdef double[:, ::1] f0u = np.empty((ny, nx)), f0v = np.empty((nyv, nx))
    cdef double[:, ::1] f1u = np.empty((ny, nx)), f1v = np.empty((nyv, nx))
    cdef double[:, ::1] fhu = np.empty((ny, nx)), fhv = np.empty((nyv, nx))
    cdef double[:, ::1] au = np.zeros((ny, nx)), av = np.zeros((nyv, nx))
    cdef Py_ssize_t j, i
    cdef int step, bad = 0
    cdef double w2 = 2.0 * M, w6 = 6.0 * M, w23 = 2.0 / (3.0 * M)
    cdef double third = 1.0 / 3.0, twothird = 2.0 / 3.0

    with nogil:
        for step in range(1, M + 1):
            _fluxes(u, v, z, Hm, f0u, f0v, ny, nx, channel)
            _euler(u, v, z, f0u, f0v, Gum, Gvm, f, g, tau, dx, dy, u1, v1, z1, ny, nx, channel)
            _fluxes(u1, v1, z1, Hm, f1u, f1v, ny, nx, channel)
            _euler(u1, v1, z1, f1u, f1v, Gum, Gvm, f, g, tau, dx, dy, u2, v2, z2, ny, nx, channel)
            if order == 2:
                for j in range(ny):
                    for i in range(nx):
                        u[j, i] = 0.5 * (u[j, i] + u2[j, i])
                        z[j, i] = 0.5 * (z[j, i] + z2[j, i])
                        au[j, i] = au[j, i] + (f0u[j, i] + f1u[j, i]) / w2
                for j in range(nyv):
                    for i in range(nx):
                        v[j, i] = 0.5 * (v[j, i] + v2[j, i])
                        av[j, i] = av[j, i] + (f0v[j, i] + f1v[j, i]) / w2
            else:
                # half stage (reuses the *1 buffers)
                for j in range(ny):
                    for i in range(nx):
                        u1[j, i] = 0.75 * u[j, i] + 0.25 * u2[j, i]
                        z1[j, i] = 0.75 * z[j, i] + 0.25 * z2[j, i]
                for j in range(nyv):
                    for i in range(nx):
                        v1[j, i] = 0.75 * v[j, i] + 0.25 * v2[j, i]
                _fluxes(u1, v1, z1, Hm, fhu, fhv, ny, nx, channel)
                _euler(u1, v1, z1, fhu, fhv, Gum, Gvm, f, g, tau, dx, dy, u2, v2, z2, ny, nx, channel)
                for j in range(ny):
                    for i in range(nx):
                        u[j, i] = third * u[j, i] + twothird * u2[j, i]
                        z[j, i] = third * z[j, i] + twothird * z2[j, i]
                        au[j, i] = au[j, i] + (f0u[j, i] + f1u[j, i]) / w6 + fhu[j, i] * w23
                for j in range(nyv):
                    for i in range(nx):
                        v[j, i] = third * v[j, i] + twothird * v2[j, i]
                        av[j, i] = av[j, i] + (f0v[j, i] + f1v[j, i]) / w6 + fhv[j, i] * w23
            if not (_all_finite(u) and _all_finite(v) and _all_finite(z)):
                bad = step
                break
    return (np.asarray(u), np.asarray(v), np.asarray(z),
            np.asarray(au), np.asarray(av), bad)


def tridiag_batched(lower, diag, upper, rhs):
    """Thomas algorithm along axis 0 for every column of 2-D (L, N) arrays.

    Returns (x, bad_row); ``bad_row`` is -1 on success or the row of the
    first zero pivot.
    """
    cdef const double[:, ::1] a = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[:, ::1] c = np.ascontiguousarray(upper, dtype=np.float64)
    cdef const double[:, ::1] d = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t L = b.shape[0], N = b.shape[1], k, n
    cdef double[:, ::1] cp = np.empty((L, N)), dp = np.empty((L, N)), x = np.empty((L, N))
    cdef double piv
    cdef Py_ssize_t bad = -1
    with nogil:
        # sweep rows outermost so the inner loop runs along contiguous columns
        for n in range(N):
            piv = b[0, n]
            if piv == 0.0:
                bad = 0
                break
            cp[0, n] = c[0, n] / piv
            dp[0, n] = d[0, n] / piv
        if bad < 0:
            for k in range(1, L):
                for n in range(N):
                    piv = b[k, n] - a[k, n] * cp[k - 1, n]
                    if piv == 0.0:
                        bad = k
                        break
                    cp[k, n] = c[k, n] / piv
                    dp[k, n] = (d[k, n] - a[k, n] * dp[k - 1, n]) / piv
                if bad >= 0:
                    break
        if bad < 0:
            for n in range(N):
                x[L - 1, n] = dp[L - 1, n]
            for k in range(L - 2, -1, -1):
                for n in range(N):
                    x[k, n] = dp[k, n] - cp[k, n] * x[k + 1, n]
    return np.asarray(x), bad
