# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Philox4x32-10 noise, ensemble stepping, tridiagonal
theta-method. Mirrors ``_fallback`` function by function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin, isfinite
from libc.stdint cimport uint32_t, uint64_t, int64_t

cnp.import_array()

cdef uint64_t M0 = 0xD2511F53
cdef uint64_t M1 = 0xCD9E8D57
cdef uint32_t W0 = 0x9E3779B9
cdef uint32_t W1 = 0xBB67AE85
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_32 = 2.3283064365386963e-10


cdef inline void _philox(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t c0 = c[0], c1 = c[1], c2 = c[2], c3 = c[3]
    cdef int rnd
    for rnd in range(10):
        if rnd:
            k0 = k0 + W0
            k1 = k1 + W1
        p0 = M0 * <uint64_t>c0
        p1 = M1 * <uint64_t>c2
        c0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        c1 = <uint32_t>p1
        c2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        c3 = <uint32_t>p0
    c[0] = c0
    c[1] = c1
    c[2] = c2
    c[3] = c3


cdef inline void _normals(uint64_t step, uint64_t j, uint32_t k0, uint32_t k1,
                          uint32_t stream, double* z) noexcept nogil:
    cdef uint32_t w[4]
    cdef double u0, u1, u2, u3, r0, r1
    w[0] = <uint32_t>step
    w[1] = <uint32_t>j
    w[2] = <uint32_t>(j >> 32)
    w[3] = stream
    _philox(w, k0, k1)
    u0 = (<double>w[0] + 0.5) * INV_2_32
    u1 = (<double>w[1] + 0.5) * INV_2_32
    u2 = (<double>w[2] + 0.5) * INV_2_32
    u3 = (<double>w[3] + 0.5) * INV_2_32
    r0 = sqrt(-2.0 * log(u0))
    r1 = sqrt(-2.0 * log(u2))
    z[0] = r0 * cos(TWO_PI * u1)
    z[1] = r0 * sin(TWO_PI * u1)
    z[2] = r1 * cos(TWO_PI * u3)


def philox4x32(counter, key):
    cdef cnp.ndarray[cnp.uint32_t, ndim=2] ctr = np.ascontiguousarray(
        np.asarray(counter, dtype=np.uint64).reshape(-1, 4).astype(np.uint32))
    cdef uint32_t k0 = <uint32_t>(int(key[0]) & 0xFFFFFFFF)
    cdef uint32_t k1 = <uint32_t>(int(key[1]) & 0xFFFFFFFF)
    cdef Py_ssize_t i
    cdef uint32_t w[4]
    for i in range(ctr.shape[0]):
        w[0] = ctr[i, 0]
        w[1] = ctr[i, 1]
        w[2] = ctr[i, 2]
        w[3] = ctr[i, 3]
        _philox(w, k0, k1)
        ctr[i, 0] = w[0]
        ctr[i, 1] = w[1]
        ctr[i, 2] = w[2]
        ctr[i, 3] = w[3]
    return ctr


def philox_normals(uint64_t step, uint64_t traj_start, Py_ssize_t n,
                   uint32_t key0, uint32_t key1, uint32_t stream):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, 3))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _normals(step, traj_start + i, key0, key1, stream, &o[i, 0])
    return out


def ensemble_block(double[:, ::1] p, uint64_t traj_start, uint32_t key0,
                   uint32_t key1, uint32_t stream, int64_t n_steps, double a,
                   double b, c, int64_t[::1] sample_steps,
                   double[:, ::1] mean_out, double[:, ::1] m2_out, paths=None):
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t ns = sample_steps.shape[0]
    cdef double c0 = c[0], c1 = c[1], c2 = c[2]
    cdef double[:, :, ::1] pv
    cdef bint keep = paths is not None
    if keep:
        pv = paths
    cdef Py_ssize_t j, k, alpha
    cdef int64_t s
    cdef double q[3]
    cdef double z[3]
    cdef double delta, cnt
    cdef Py_ssize_t bad = 0
    with nogil:
        for k in range(ns):
            for alpha in range(3):
                mean_out[k, alpha] = 0.0
                m2_out[k, alpha] = 0.0
        for j in range(n):
            q[0] = p[j, 0]
            q[1] = p[j, 1]
            q[2] = p[j, 2]
            cnt = <double>(j + 1)
            k = 0
            s = 0
            while True:
                # Welford update in trajectory order
                while k < ns and sample_steps[k] == s:
                    for alpha in range(3):
                        delta = q[alpha] - mean_out[k, alpha]
                        mean_out[k, alpha] += delta / cnt
                        m2_out[k, alpha] += delta * (q[alpha] - mean_out[k, alpha])
                        if keep:
                            pv[j, k, alpha] = q[alpha]
                    k += 1
                if s == n_steps:
                    break
                s += 1
                _normals(<uint64_t>s, traj_start + j, key0, key1, stream, z)
                q[0] = a * q[0] + c0 + b * z[0]
                q[1] = a * q[1] + c1 + b * z[1]
                q[2] = a * q[2] + c2 + b * z[2]
            p[j, 0] = q[0]
            p[j, 1] = q[1]
            p[j, 2] = q[2]
            if not (isfinite(q[0]) and isfinite(q[1]) and isfinite(q[2])):
                bad += 1
    return bad


cdef void _thomas(double[::1] lo, double[::1] di, double[::1] up,
                  double[::1] r, double[::1] cp, double[::1] x) noexcept nogil:
    cdef Py_ssize_t n = di.shape[0], i
    cdef double m
    cp[0] = up[0] / di[0]
    x[0] = r[0] / di[0]
    for i in range(1, n):
        m = di[i] - lo[i] * cp[i - 1]
        cp[i] = up[i] / m
        x[i] = (r[i] - lo[i] * x[i - 1]) / m
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - cp[i] * x[i + 1]


def tridiag_solve(lower, diag, upper, rhs):
    cdef double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[::1] di = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(rhs, dtype=np.float64)
    out = np.empty(di.shape[0])
    cdef double[::1] x = out
    cdef double[::1] cp = np.empty(di.shape[0])
    with nogil:
        _thomas(lo, di, up, r, cp, x)
    return out


def theta_steps(lower, diag, upper, double theta, double dt, x0, int64_t n_steps):
    cdef double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[::1] di = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef Py_ssize_t n = di.shape[0], i
    cdef int64_t step
    cdef double e = (1.0 - theta) * dt
    cdef double f = theta * dt
    out = np.array(x0, dtype=np.float64)
    cdef double[::1] x = out
    cdef double[::1] r = np.empty(n)
    cdef double[::1] cp = np.empty(n)
    cdef double[::1] al = np.empty(n)
    cdef double[::1] ad = np.empty(n)
    cdef double[::1] au = np.empty(n)
    for i in range(n):
        al[i] = -f * lo[i]
        ad[i] = 1.0 - f * di[i]
        au[i] = -f * up[i]
    with nogil:
        for step in range(n_steps):
            for i in range(n):
                r[i] = x[i] + e * di[i] * x[i]
                if i > 0:
                    r[i] += e * lo[i] * x[i - 1]
                if i < n - 1:
                    r[i] += e * up[i] * x[i + 1]
            _thomas(al, ad, au, r, cp, x)
    return out
