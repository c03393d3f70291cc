# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

BACKEND = "cython"


cdef void _complement(const double* x, Py_ssize_t k, double* out) noexcept nogil:
    # out is k x (k-1), row-major; columns 1..k-1 of the Householder reflector
    cdef double nrm = 0.0, s, uu
    cdef Py_ssize_t i, j
    cdef double u[64]
    for i in range(k):
        nrm += x[i] * x[i]
    nrm = sqrt(nrm)
    for i in range(k):
        u[i] = x[i] / nrm
    s = 1.0 if u[0] >= 0.0 else -1.0
    u[0] += s
    uu = 0.0
    for i in range(k):
        uu += u[i] * u[i]
    for i in range(k):
        for j in range(1, k):
            out[i * (k - 1) + j - 1] = (1.0 if i == j else 0.0) - 2.0 * u[i] * u[j] / uu


def householder_complement(X):
    cdef const double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t N = x.shape[0], k = x.shape[1], n
    if k > 64:
        raise ValueError("dimension above 64 not supported by the compiled kernel")
    out = np.empty((N, k, k - 1))
    cdef double[:, :, ::1] o = out
    with nogil:
        for n in range(N):
            _complement(&x[n, 0], k, &o[n, 0, 0])
    return out


cdef void _frame(const double* A, const double* p, Py_ssize_t d,
                 double* F, double* Z, double* wh, double* wnorm) noexcept nogil:
    # F: d x (d-1) tangent frame; Z: d x (d-2) contact-plane frame
    cdef Py_ssize_t i, j, l
    cdef double w[64]
    cdef double Zh[64 * 63]
    cdef double acc, nw
    _complement(p, d, F)
    for i in range(d):
        acc = 0.0
        for j in range(d):
            acc += A[j * d + i] * p[j]
        w[i] = acc
    nw = 0.0
    for j in range(d - 1):
        acc = 0.0
        for i in range(d):
            acc += F[i * (d - 1) + j] * w[i]
        wh[j] = acc
        nw += acc * acc
    nw = sqrt(nw)
    wnorm[0] = nw
    if nw > 0.0:
        _complement(wh, d - 1, Zh)
    else:
        for i in range(d - 1):
            w[i] = 1.0 if i == 0 else 0.0
        _complement(w, d - 1, Zh)
    for i in range(d):
        for l in range(d - 2):
            acc = 0.0
            for j in range(d - 1):
                acc += F[i * (d - 1) + j] * Zh[j * (d - 2) + l]
            Z[i * (d - 2) + l] = acc


def contact_frames(A, P):
    cdef const double[:, ::1] p = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t N = p.shape[0], d = p.shape[1], n
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 2:
        A = A[None]
    cdef const double[:, :, ::1] a = np.ascontiguousarray(A)
    cdef Py_ssize_t stride = 1 if a.shape[0] > 1 else 0
    if d > 64:
        raise ValueError("dimension above 64 not supported by the compiled kernel")
    Zout = np.empty((N, d, d - 2))
    wout = np.empty(N)
    cdef double[:, :, ::1] z = Zout
    cdef double[::1] wn = wout
    cdef double F[64 * 63]
    cdef double wh[64]
    with nogil:
        for n in range(N):
            _frame(&a[n * stride, 0, 0], &p[n, 0], d, F, &z[n, 0, 0], wh, &wn[n])
    return Zout, wout


def solve_contact(A, P, a_in, B):
    cdef const double[:, ::1] p = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t N = p.shape[0], d = p.shape[1], n, i, j, k, l, piv
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 2:
        A = A[None]
    cdef const double[:, :, ::1] am = np.ascontiguousarray(A)
    cdef Py_ssize_t stride = 1 if am.shape[0] > 1 else 0
    cdef const double[::1] av = np.ascontiguousarray(np.broadcast_to(np.asarray(a_in, dtype=np.float64), (N,)))
    cdef const double[:, ::1] bv = np.ascontiguousarray(np.broadcast_to(np.asarray(B, dtype=np.float64), (N, d)))
    if d > 64:
        raise ValueError("dimension above 64 not supported by the compiled kernel")
    Vout = np.empty((N, d))
    Dout = np.empty(N)
    cdef double[:, ::1] V = Vout
    cdef double[::1] D = Dout
    cdef double F[64 * 63]
    cdef double Z[64 * 62]
    cdef double AZ[64 * 62]
    cdef double S[63 * 63]
    cdef double r[63]
    cdef double c[63]
    cdef double wh[64]
    cdef double wn, acc, best, t, det, f
    cdef const double* Ap
    cdef Py_ssize_t m = d - 1
    with nogil:
        for n in range(N):
            Ap = &am[n * stride, 0, 0]
            _frame(Ap, &p[n, 0], d, F, Z, wh, &wn)
            for i in range(d):
                for l in range(d - 2):
                    acc = 0.0
                    for j in range(d):
                        acc += Ap[i * d + j] * Z[j * (d - 2) + l]
                    AZ[i * (d - 2) + l] = acc
            for j in range(m):
                S[j] = wh[j]
            r[0] = av[n]
            for l in range(d - 2):
                for j in range(m):
                    acc = 0.0
                    for i in range(d):
                        acc += F[i * m + j] * AZ[i * (d - 2) + l]
                    S[(l + 1) * m + j] = 2.0 * acc
                acc = 0.0
                for i in range(d):
                    acc += bv[n, i] * Z[i * (d - 2) + l]
                r[l + 1] = acc
            # Gaussian elimination with partial pivoting
            det = 1.0
            for k in range(m):
                piv = k
                best = fabs(S[k * m + k])
                for i in range(k + 1, m):
                    if fabs(S[i * m + k]) > best:
                        best = fabs(S[i * m + k])
                        piv = i
                if best == 0.0:
                    det = 0.0
                    break
                if piv != k:
                    for j in range(m):
                        t = S[k * m + j]
                        S[k * m + j] = S[piv * m + j]
                        S[piv * m + j] = t
                    t = r[k]
                    r[k] = r[piv]
                    r[piv] = t
                    det = -det
                det *= S[k * m + k]
                for i in range(k + 1, m):
                    f = S[i * m + k] / S[k * m + k]
                    if f != 0.0:
                        for j in range(k, m):
                            S[i * m + j] -= f * S[k * m + j]
                        r[i] -= f * r[k]
            D[n] = det
            if det == 0.0:
                for i in range(d):
                    V[n, i] = 0.0
                continue
            for k in range(m - 1, -1, -1):
                acc = r[k]
                for j in range(k + 1, m):
                    acc -= S[k * m + j] * c[j]
                c[k] = acc / S[k * m + k]
            for i in range(d):
                acc = 0.0
                for j in range(m):
                    acc += F[i * m + j] * c[j]
                V[n, i] = acc
    return Vout, Dout


def pfaffian(M):
    cdef const double[:, :, ::1] src = np.ascontiguousarray(M, dtype=np.float64)
    cdef Py_ssize_t N = src.shape[0], sz = src.shape[1], n, k, kp, i, j
    out = np.empty(N)
    cdef double[::1] o = out
    work = np.empty((sz, sz))
    cdef double[:, ::1] A = work
    cdef double pf, best, t, piv
    if sz % 2:
        out[:] = 0.0
        return out
    with nogil:
        for n in range(N):
            for i in range(sz):
                for j in range(sz):
                    A[i, j] = src[n, i, j]
            pf = 1.0
            for k in range(0, sz - 1, 2):
                kp = k + 1
                best = fabs(A[k + 1, k])
                for i in range(k + 2, sz):
                    if fabs(A[i, k]) > best:
                        best = fabs(A[i, k])
                        kp = i
                if kp != k + 1:
                    for j in range(sz):
                        t = A[k + 1, j]
                        A[k + 1, j] = A[kp, j]
                        A[kp, j] = t
                    for i in range(sz):
                        t = A[i, k + 1]
                        A[i, k + 1] = A[i, kp]
                        A[i, kp] = t
                    pf = -pf
                if A[k + 1, k] == 0.0:
                    pf = 0.0
                    break
                piv = A[k, k + 1]
                pf *= piv
                if k + 2 < sz:
                    for i in range(k + 2, sz):
                        for j in range(k + 2, sz):
                            A[i, j] += (A[k, i] / piv) * A[j, k + 1] - A[i, k + 1] * (A[k, j] / piv)
            o[n] = pf
    return out
