# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: simplex projection and the simplex-QP gradient loop.

Same algorithms as ``_kernels_py``; see there for the contracts.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdlib cimport qsort, malloc, free

cnp.import_array()


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double x = (<double*>a)[0]
    cdef double y = (<double*>b)[0]
    if x < y:
        return 1
    if x > y:
        return -1
    return 0


cdef void _project(const double* y, double* out, double* work, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    cdef double css = 0.0, t, tau = 0.0, v
    for j in range(n):
        work[j] = y[j]
    qsort(work, n, sizeof(double), _cmp_desc)
    for j in range(n):
        css += work[j]
        t = (css - 1.0) / (j + 1)
        if work[j] - t > 0.0:
            tau = t
    for j in range(n):
        v = y[j] - tau
        out[j] = v if v > 0.0 else 0.0


cdef void _matvec(const double* Q, const double* x, const double* V, double* g, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += Q[i * n + j] * x[j]
        g[i] = s - V[i]


cdef double _residual(const double* Q, const double* V, const double* x, double inv_l,
                      double* g, double* tmp, double* z, double* work, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double r = 0.0, d
    _matvec(Q, x, V, g, n)
    for i in range(n):
        tmp[i] = x[i] - inv_l * g[i]
    _project(tmp, z, work, n)
    for i in range(n):
        d = fabs(x[i] - z[i])
        if d > r:
            r = d
    return r


def project_simplex(y):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yy.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    _project(&yy[0], &out[0], &work[0], n)
    return out


def simplex_pgd(Q, V, x0, double lipschitz, double tol, long max_iter):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] QQ = np.ascontiguousarray(Q, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] VV = np.ascontiguousarray(V, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t n = VV.shape[0]
    cdef Py_ssize_t i
    cdef long k
    cdef double inv_l = 1.0 / lipschitz
    cdef double t = 1.0, t_new, beta, dot
    cdef bint converged = False
    cdef long iters = max_iter
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xout = np.empty(n, dtype=np.float64)
    cdef double* buf = <double*>malloc(8 * n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* x = buf
    cdef double* y = buf + n
    cdef double* xn = buf + 2 * n
    cdef double* g = buf + 3 * n
    cdef double* tmp = buf + 4 * n
    cdef double* z = buf + 5 * n
    cdef double* work = buf + 6 * n
    cdef double* step = buf + 7 * n
    cdef const double* q = &QQ[0, 0]
    cdef const double* v = &VV[0]
    try:
        with nogil:
            _project(&x0v[0], x, work, n)
            if _residual(q, v, x, inv_l, g, tmp, z, work, n) <= tol:
                converged = True
                iters = 0
            else:
                for i in range(n):
                    y[i] = x[i]
                for k in range(1, max_iter + 1):
                    _matvec(q, y, v, g, n)
                    for i in range(n):
                        tmp[i] = y[i] - inv_l * g[i]
                    _project(tmp, xn, work, n)
                    if _residual(q, v, xn, inv_l, g, tmp, z, work, n) <= tol:
                        for i in range(n):
                            x[i] = xn[i]
                        converged = True
                        iters = k
                        break
                    dot = 0.0
                    for i in range(n):
                        step[i] = xn[i] - x[i]
                        dot += (y[i] - xn[i]) * step[i]
                    if dot > 0.0:
                        t = 1.0
                        for i in range(n):
                            y[i] = xn[i]
                    else:
                        t_new = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
                        beta = (t - 1.0) / t_new
                        for i in range(n):
                            y[i] = xn[i] + beta * step[i]
                        t = t_new
                    for i in range(n):
                        x[i] = xn[i]
        for i in range(n):
            xout[i] = x[i]
    finally:
        free(buf)
    return xout, int(iters), bool(converged)
