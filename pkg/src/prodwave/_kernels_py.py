"""Numpy implementations of the compiled kernels, used when the extension is not built."""
import numpy as np

DBL_EPS = np.finfo(np.float64).eps


def ar1_filter(x, lam, init=None):
    """Run ``s[t] = lam * s[t-1] + x[t]`` along the last axis."""
    arr = np.asarray(x, dtype=np.float64)
    squeeze = arr.ndim == 1
    arr2 = arr.reshape(1, -1) if squeeze else arr
    m, T = arr2.shape
    s = np.zeros(m) if init is None else np.broadcast_to(np.asarray(init, dtype=np.float64), (m,)).copy()
    out = np.empty((m, T))
    for t in range(T):
        s = lam * s + arr2[:, t]
        out[:, t] = s
    return out[0] if squeeze else out


def tridiagonalize(a, want_q=False):
    """Householder reduction of a symmetric matrix to tridiagonal form."""
    w = np.array(a, dtype=np.float64, copy=True)
    n = w.shape[0]
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    reflectors = []
    for k in range(n - 2):
        v = w[k + 1:, k].copy()
        d[k] = w[k, k]
        xnorm = np.linalg.norm(v)
        if xnorm == 0.0:
            reflectors.append(None)
            continue
        alpha = -np.copysign(xnorm, v[0])
        v[0] -= alpha
        e[k] = alpha
        vnorm2 = v @ v
        if vnorm2 == 0.0:
            reflectors.append(None)
            continue
        beta = 2.0 / vnorm2
        block = w[k + 1:, k + 1:]
        p = beta * (block @ v)
        p -= 0.5 * beta * (v @ p) * v
        block -= np.outer(v, p) + np.outer(p, v)
        reflectors.append((beta, v))
    if n >= 2:
        d[n - 2] = w[n - 2, n - 2]
        e[n - 2] = w[n - 1, n - 2]
    if n >= 1:
        d[n - 1] = w[n - 1, n - 1]
    if not want_q:
        return d, e, None
    q = np.eye(n)
    for k in range(len(reflectors) - 1, -1, -1):
        if reflectors[k] is None:
            continue
        beta, v = reflectors[k]
        sub = q[k + 1:, k + 1:]
        sub -= beta * np.outer(v, v @ sub)
    return d, e, q


def tridiagonal_ql(d, e, z=None, max_iter=60):
    """Implicit QL with shifts on a symmetric tridiagonal matrix."""
    d = np.array(d, dtype=np.float64, copy=True)
    n = d.shape[0]
    e_full = np.zeros(n)
    if n > 1:
        e_full[: n - 1] = np.asarray(e, dtype=np.float64)
    zt = np.array(np.asarray(z, dtype=np.float64).T, copy=True) if z is not None else None
    # scalar loop on python floats is far faster than numpy scalar indexing
    dv = d.tolist()
    ev = e_full.tolist()
    eps = float(DBL_EPS)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                if abs(ev[m]) <= eps * (abs(dv[m]) + abs(dv[m + 1])):
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise RuntimeError("implicit QL did not converge")
            g = (dv[l + 1] - dv[l]) / (2.0 * ev[l])
            r = np.hypot(g, 1.0)
            g = dv[m] - dv[l] + ev[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * ev[i]
                b = c * ev[i]
                r = float(np.hypot(f, g))
                ev[i + 1] = r
                if r == 0.0:
                    dv[i + 1] -= p
                    ev[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = dv[i + 1] - p
                r = (dv[i] - g) * s + 2.0 * c * b
                p = s * r
                dv[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    row_next = zt[i + 1].copy()
                    zt[i + 1] = s * zt[i] + c * row_next
                    zt[i] = c * zt[i] - s * row_next
                i -= 1
            if underflow:
                continue
            dv[l] -= p
            ev[l] = g
            ev[m] = 0.0
    return np.array(dv), (np.ascontiguousarray(zt.T) if zt is not None else None)


def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi rotations for a small dense symmetric matrix."""
    w = np.array(a, dtype=np.float64, copy=True)
    n = w.shape[0]
    v = np.eye(n)
    total = float(np.sum(w * w))
    for _ in range(max_sweeps):
        off = float(np.sum(np.triu(w, 1) ** 2))
        if off == 0.0 or off <= tol * tol * total:
            return np.diag(w).copy(), v
        for i in range(n - 1):
            for j in range(i + 1, n):
                apq = w[i, j]
                if apq == 0.0:
                    continue
                theta = (w[j, j] - w[i, i]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ri, rj = w[i].copy(), w[j].copy()
                w[i], w[j] = c * ri - s * rj, s * ri + c * rj
                ci, cj = w[:, i].copy(), w[:, j].copy()
                w[:, i], w[:, j] = c * ci - s * cj, s * ci + c * cj
                w[i, j] = w[j, i] = 0.0
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i], v[:, j] = c * vi - s * vj, s * vi + c * vj
    raise RuntimeError("Jacobi sweeps did not converge")
