# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: batched AR(1) filtering and dense symmetric eigensolvers.

Every function here has a numpy twin in ``_kernels_py`` with the same signature.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot, copysign

cnp.import_array()

DBL_EPS = np.finfo(np.float64).eps


def ar1_filter(x, double lam, init=None):
    """Run ``s[t] = lam * s[t-1] + x[t]`` along the last axis.

    Parameters
    ----------
    x : ndarray, shape (T,) or (m, T)
    lam : float
    init : ndarray of shape (m,) or float, optional
        State before the first input (zero by default).
    """
    arr = np.asarray(x, dtype=np.float64)
    squeeze = arr.ndim == 1
    arr2 = np.ascontiguousarray(arr.reshape(1, -1) if squeeze else arr)
    cdef Py_ssize_t m = arr2.shape[0], T = arr2.shape[1]
    s0 = np.zeros(m) if init is None else np.broadcast_to(
        np.asarray(init, dtype=np.float64), (m,)).copy()
    out = np.empty((m, T), dtype=np.float64)
    cdef double[:, ::1] xv = arr2
    cdef double[:, ::1] ov = out
    cdef double[::1] sv = s0
    cdef Py_ssize_t i, t
    cdef double s
    with nogil:
        for i in range(m):
            s = sv[i]
            for t in range(T):
                s = lam * s + xv[i, t]
                ov[i, t] = s
    return out[0] if squeeze else out


def tridiagonalize(a, bint want_q=False):
    """Householder reduction of a symmetric matrix to tridiagonal form.

    Returns ``(d, e, q)`` with ``d`` the diagonal, ``e`` the subdiagonal
    (length n-1) and ``q`` orthogonal with ``q.T @ a @ q`` tridiagonal
    (``None`` unless ``want_q``).
    """
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = work.shape[0]
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    refl = np.zeros((n, n)) if want_q else None
    betas = np.zeros(n)
    cdef double[:, ::1] w = work
    cdef double[::1] dv = d, ev = e, bv = betas
    cdef double[::1] v = np.zeros(n), p = np.zeros(n)
    cdef double[:, ::1] rv
    cdef Py_ssize_t k, i, j, m
    cdef double alpha, xnorm, vnorm2, beta, kk, acc, vi, qi
    if n == 0:
        return d, e, (np.eye(0) if want_q else None)
    if want_q:
        rv = refl
    with nogil:
        for k in range(n - 2):
            m = n - k - 1
            xnorm = 0.0
            for i in range(m):
                v[i] = w[k + 1 + i, k]
                xnorm += v[i] * v[i]
            xnorm = sqrt(xnorm)
            dv[k] = w[k, k]
            if xnorm == 0.0:
                ev[k] = 0.0
                bv[k] = 0.0
                continue
            alpha = -copysign(xnorm, v[0])
            v[0] -= alpha
            vnorm2 = 0.0
            for i in range(m):
                vnorm2 += v[i] * v[i]
            ev[k] = alpha
            if vnorm2 == 0.0:
                bv[k] = 0.0
                continue
            beta = 2.0 / vnorm2
            bv[k] = beta
            # p = beta * B v on the trailing block
            for i in range(m):
                acc = 0.0
                for j in range(m):
                    acc += w[k + 1 + i, k + 1 + j] * v[j]
                p[i] = beta * acc
            kk = 0.0
            for i in range(m):
                kk += v[i] * p[i]
            kk *= 0.5 * beta
            for i in range(m):
                p[i] -= kk * v[i]
            for i in range(m):
                vi = v[i]
                qi = p[i]
                for j in range(m):
                    w[k + 1 + i, k + 1 + j] -= vi * p[j] + qi * v[j]
            if want_q:
                for i in range(m):
                    rv[k, k + 1 + i] = v[i]
        if n >= 2:
            dv[n - 2] = w[n - 2, n - 2]
            ev[n - 2] = w[n - 1, n - 2]
        dv[n - 1] = w[n - 1, n - 1]
    if not want_q:
        return d, e, None
    q = np.eye(n)
    cdef double[:, ::1] qv = q
    cdef double[::1] tmp = np.zeros(n)
    with nogil:
        for k in range(n - 3, -1, -1):
            beta = bv[k]
            if beta == 0.0:
                continue
            m = n - k - 1
            # q[k+1:, k+1:] -= beta * v (v^T q[k+1:, k+1:])
            for j in range(m):
                tmp[j] = 0.0
            for i in range(m):
                vi = rv[k, k + 1 + i]
                if vi != 0.0:
                    for j in range(m):
                        tmp[j] += vi * qv[k + 1 + i, k + 1 + j]
            for i in range(m):
                vi = beta * rv[k, k + 1 + i]
                for j in range(m):
                    qv[k + 1 + i, k + 1 + j] -= vi * tmp[j]
    return d, e, q


def tridiagonal_ql(d, e, z=None, int max_iter=60):
    """Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.

    Parameters
    ----------
    d : ndarray (n,)
        Diagonal.
    e : ndarray (n-1,)
        Subdiagonal.
    z : ndarray (n, n), optional
        Basis to rotate; eigenvectors come back as its columns.

    Returns
    -------
    (w, z) with unsorted eigenvalues ``w``.
    """
    dd = np.array(d, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = dd.shape[0]
    ee = np.zeros(n)
    if n > 1:
        ee[: n - 1] = np.asarray(e, dtype=np.float64)
    cdef bint want_z = z is not None
    # rotate rows of z.T so the inner loop is contiguous
    zt = np.ascontiguousarray(np.asarray(z, dtype=np.float64).T) if want_z else np.zeros((1, 1))
    cdef double[::1] dv = dd, ev = ee
    cdef double[:, ::1] zv = zt
    cdef Py_ssize_t l, m, i, k
    cdef int it
    cdef double g, r, s, c, p, f, b, scale, tmp
    cdef double eps = DBL_EPS
    cdef bint failed = False
    with nogil:
        for l in range(n):
            it = 0
            while True:
                m = l
                while m < n - 1:
                    scale = fabs(dv[m]) + fabs(dv[m + 1])
                    if fabs(ev[m]) <= eps * scale:
                        break
                    m += 1
                if m == l:
                    break
                it += 1
                if it > max_iter:
                    failed = True
                    break
                g = (dv[l + 1] - dv[l]) / (2.0 * ev[l])
                r = hypot(g, 1.0)
                g = dv[m] - dv[l] + ev[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                i = m - 1
                while i >= l:
                    f = s * ev[i]
                    b = c * ev[i]
                    r = hypot(f, g)
                    ev[i + 1] = r
                    if r == 0.0:
                        dv[i + 1] -= p
                        ev[m] = 0.0
                        break
                    s = f / r
                    c = g / r
                    g = dv[i + 1] - p
                    r = (dv[i] - g) * s + 2.0 * c * b
                    p = s * r
                    dv[i + 1] = g + p
                    g = c * r - b
                    if want_z:
                        for k in range(n):
                            tmp = zv[i + 1, k]
                            zv[i + 1, k] = s * zv[i, k] + c * tmp
                            zv[i, k] = c * zv[i, k] - s * tmp
                    i -= 1
                if r == 0.0 and i >= l:
                    continue
                dv[l] -= p
                ev[l] = g
                ev[m] = 0.0
            if failed:
                break
    if failed:
        raise RuntimeError("implicit QL did not converge")
    return dd, (np.ascontiguousarray(zt.T) if want_z else None)


def jacobi_eigh(a, double tol=1e-15, int max_sweeps=100):
    """Cyclic Jacobi rotations for a small dense symmetric matrix.

    Returns ``(w, v)`` with unsorted eigenvalues and eigenvectors as columns.
    """
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = work.shape[0]
    vecs = np.eye(n)
    cdef double[:, ::1] w = work
    cdef double[:, ::1] v = vecs
    cdef Py_ssize_t i, j, k, sweep
    cdef double off, total, theta, t, c, s, apk, aqk, app, aqq, apq
    cdef bint converged = False
    with nogil:
        total = 0.0
        for i in range(n):
            for j in range(n):
                total += w[i, j] * w[i, j]
        for sweep in range(max_sweeps):
            off = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    off += w[i, j] * w[i, j]
            if off <= tol * tol * total or off == 0.0:
                converged = True
                break
            for i in range(n - 1):
                for j in range(i + 1, n):
                    apq = w[i, j]
                    if apq == 0.0:
                        continue
                    app = w[i, i]
                    aqq = w[j, j]
                    theta = (aqq - app) / (2.0 * apq)
                    t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        apk = w[i, k]
                        aqk = w[j, k]
                        w[i, k] = c * apk - s * aqk
                        w[j, k] = s * apk + c * aqk
                    for k in range(n):
                        apk = w[k, i]
                        aqk = w[k, j]
                        w[k, i] = c * apk - s * aqk
                        w[k, j] = s * apk + c * aqk
                    w[i, j] = 0.0
                    w[j, i] = 0.0
                    for k in range(n):
                        apk = v[k, i]
                        aqk = v[k, j]
                        v[k, i] = c * apk - s * aqk
                        v[k, j] = s * apk + c * aqk
    if not converged:
        raise RuntimeError("Jacobi sweeps did not converge")
    return np.diag(work).copy(), vecs
