# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled periodic stencils for the Klein-Gordon right-hand side.

``faces[a][i]`` is the flux coefficient on the face between node ``i`` and
its ``+1`` neighbour along axis ``a``.
"""
import numpy as np
cimport numpy as cnp

ctypedef double complex cplx


cdef void _div_grad_1d(const cplx[::1] phi, const double[::1] a, double inv_h2, cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t n = phi.shape[0], i, ip, im
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        out[i] = (a[i] * (phi[ip] - phi[i]) - a[im] * (phi[i] - phi[im])) * inv_h2


cdef void _div_grad_3d(const cplx[:, :, ::1] phi, const double[:, :, ::1] ax, const double[:, :, ::1] ay,
                       const double[:, :, ::1] az, double inv_h2, cplx[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t n0 = phi.shape[0], n1 = phi.shape[1], n2 = phi.shape[2]
    cdef Py_ssize_t i, j, k, ip, im, jp, jm, kp, km
    cdef cplx c
    for i in range(n0):
        ip = i + 1 if i + 1 < n0 else 0
        im = i - 1 if i > 0 else n0 - 1
        for j in range(n1):
            jp = j + 1 if j + 1 < n1 else 0
            jm = j - 1 if j > 0 else n1 - 1
            for k in range(n2):
                kp = k + 1 if k + 1 < n2 else 0
                km = k - 1 if k > 0 else n2 - 1
                c = phi[i, j, k]
                out[i, j, k] = (ax[i, j, k] * (phi[ip, j, k] - c) - ax[im, j, k] * (c - phi[im, j, k])
                                + ay[i, j, k] * (phi[i, jp, k] - c) - ay[i, jm, k] * (c - phi[i, jm, k])
                                + az[i, j, k] * (phi[i, j, kp] - c) - az[i, j, km] * (c - phi[i, j, km])) * inv_h2


def div_grad(phi, faces, double inv_h2):
    phi = np.ascontiguousarray(phi, dtype=np.complex128)
    out = np.empty_like(phi)
    if phi.ndim == 1:
        _div_grad_1d(phi, np.ascontiguousarray(faces[0], dtype=np.float64), inv_h2, out)
    elif phi.ndim == 3:
        _div_grad_3d(phi, np.ascontiguousarray(faces[0], dtype=np.float64),
                     np.ascontiguousarray(faces[1], dtype=np.float64),
                     np.ascontiguousarray(faces[2], dtype=np.float64), inv_h2, out)
    else:
        raise ValueError("only 1D and 3D grids are supported")
    return out


def kg_momentum_rhs(phi, Pi, inv_b, s_m2, faces, double inv_h2):
    """Return ``(Pi / B, div(A grad phi) - sqrt|g| m^2 phi)`` on a periodic grid."""
    cdef cplx[::1] pv, qv, dq, dp
    cdef const double[::1] ib, sm
    cdef Py_ssize_t i, n
    lap = div_grad(phi, faces, inv_h2)
    Pi = np.ascontiguousarray(Pi, dtype=np.complex128)
    phi = np.ascontiguousarray(phi, dtype=np.complex128)
    shape = phi.shape
    dphi = np.empty_like(phi)
    pv = phi.reshape(-1)
    qv = Pi.reshape(-1)
    dq = lap.reshape(-1)
    dp = dphi.reshape(-1)
    ib = np.ascontiguousarray(np.broadcast_to(inv_b, shape), dtype=np.float64).reshape(-1)
    sm = np.ascontiguousarray(np.broadcast_to(s_m2, shape), dtype=np.float64).reshape(-1)
    n = pv.shape[0]
    with nogil:
        for i in range(n):
            dp[i] = qv[i] * ib[i]
            dq[i] = dq[i] - sm[i] * pv[i]
    return dphi, lap
