"""Dense symmetric eigenvalues: Jacobi for small matrices, Householder + implicit QL otherwise."""
from __future__ import annotations

import numpy as np

from . import kernels

JACOBI_MAX = 64


class EigenResidualError(RuntimeError):
    """An eigenpair failed the residual check."""


def eigh_symmetric(a, vectors: bool = False, method: str = "auto", residual_tol: float | None = 1e-9):
    """Eigen-decomposition of a real symmetric matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
    vectors : bool
        Also return eigenvectors (columns).
    method : {"auto", "jacobi", "ql"}
        ``auto`` uses Jacobi up to 64 rows.
    residual_tol : float or None
        When vectors are computed, require ``||a x - w x|| <= residual_tol * ||a||`` per pair.

    Returns
    -------
    w : ndarray
        Eigenvalues in descending order.
    v : ndarray or None
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 0:
        return np.zeros(0), (np.zeros((0, 0)) if vectors else None)
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX else "ql"
    if method == "jacobi":
        w, v = kernels.jacobi_eigh(a)
        if not vectors:
            v = None
    elif method == "ql":
        d, e, q = kernels.tridiagonalize(a, vectors)
        w, v = kernels.tridiagonal_ql(d, e, q)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w)[::-1]
    w = w[order]
    if v is not None:
        v = v[:, order]
        if residual_tol is not None:
            scale = max(np.linalg.norm(a, 2), np.finfo(float).tiny)
            res = np.linalg.norm(a @ v - v * w, axis=0)
            worst = float(res.max())
            if worst > residual_tol * scale:
                raise EigenResidualError(f"eigenpair residual {worst:.3e} exceeds {residual_tol:g}*||a||")
    return w, v


def tridiagonal_eigvals(diag, offdiag):
    """Eigenvalues (descending) of a symmetric tridiagonal matrix by implicit QL."""
    w, _ = kernels.tridiagonal_ql(np.asarray(diag, float), np.asarray(offdiag, float))
    return np.sort(w)[::-1]
