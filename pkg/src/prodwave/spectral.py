"""Perron and dominant-transient eigenpairs, the normalized two-mode objects and the degree proxy."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, asdict
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .netgen import DegreeSequence, ProductionNetwork, degree_moments

STALL_BUDGET = 2000


class SpectralError(RuntimeError):
    """Base class for eigen-computation failures."""


class ConvergenceError(SpectralError):
    def __init__(self, msg, residual):
        super().__init__(f"{msg} (last residual {residual:.3e})")
        self.residual = residual


class NotPrimitiveError(SpectralError):
    pass


class NoSpectralGapError(SpectralError):
    pass


class DefectivePairError(SpectralError):
    pass


class ComplexModeError(SpectralError):
    """Raised when a scalar two-mode reduction is requested for a complex transient pair."""


class PerronPair(NamedTuple):
    lambda1: float
    v1: np.ndarray
    u1: np.ndarray
    residual: float
    primitive: bool


class TransientPair(NamedTuple):
    lambda2: complex
    lambda2_mod: float
    lambda2_complex: bool
    tied: bool
    u2: np.ndarray
    v2: np.ndarray
    residual: float
    iterations: int


@dataclass(frozen=True)
class SpectralSummary:
    """Two-mode reduction of a network. ``lambda2`` is the signed real part."""

    lambda1: float
    lambda2: float
    lambda2_imag: float
    lambda2_mod: float
    lambda2_complex: bool
    lambda2_tied: bool
    u2: np.ndarray
    v2: np.ndarray
    u2_norm: np.ndarray | None
    v2_norm: np.ndarray | None
    b: float | None

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


@dataclass(frozen=True)
class ProxyReport:
    u2_proxy: np.ndarray
    b_alpha: float
    c: float
    cosine_true_proxy: float


class LogDerivative(NamedTuple):
    direct: float
    analytic: float
    recentering: float
    rescaling: float


def _lazy_power(M, shift, x, tol, max_iter):
    """Unit eigenvector of ``M`` for the root ``shift`` by lazy power iteration.

    A second root close to ``shift`` makes the lazy iteration crawl; after ``STALL_BUDGET`` steps it switches to inverse
    iteration just above ``shift``, which separates such roots in a few solves.
    """
    for _ in range(min(max_iter, STALL_BUDGET)):
        y = 0.5 * (M @ x + shift * x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return x
        y /= ny
        step = float(np.linalg.norm(y - x))
        x = y
        if step < tol:
            return x
    mu = shift * (1.0 + 1e-9)
    lu = splu(sp.csc_matrix(M - mu * sp.identity(M.shape[0], format="csc")))
    for _ in range(50):
        y = lu.solve(x)
        y /= np.linalg.norm(y)
        if y @ x < 0:
            y = -y
        step = float(np.linalg.norm(y - x))
        x = y
        # a repeated root lets the iterate drift inside its eigenspace, so a
        # roundoff-level residual also ends the loop
        res = float(np.linalg.norm(M @ x - float(x @ (M @ x)) * x))
        if step < tol or res < 100 * np.finfo(np.float64).eps * shift:
            return x
    raise ConvergenceError("Perron iteration did not converge", res)


def perron(net: ProductionNetwork, tol: float = 1e-10, max_iter: int = 100_000, strict: bool = True) -> PerronPair:
    """Perron root and eigenvectors by power iteration, scaled so ``u1 @ v1 = 1``.

    Columns of ``A`` sum to ``s = 1 - beta``, so ``s`` is the spectral radius.
    Iterating the lazy operator ``(A + s I) / 2`` keeps the Perron root strictly
    dominant even when ``-s`` (a periodic network) shares its modulus. With
    ``strict`` a right eigenvector with non-positive entries raises
    ``NotPrimitiveError``; otherwise the flag is returned.
    """
    A = net.A
    n = net.n
    shift = 1.0 - net.beta
    x = _lazy_power(A, shift, np.full(n, 1.0 / math.sqrt(n)), tol, max_iter)
    lam = float(x @ (A @ x))
    res = float(np.linalg.norm(A @ x - lam * x))
    u1 = np.ones(n)
    if np.linalg.norm(A.T @ u1 - lam * u1) > 1e-8 * max(1.0, math.sqrt(n)):
        u1 = _lazy_power(A.T, shift, np.full(n, 1.0 / math.sqrt(n)), tol, max_iter)
    if x.sum() < 0:
        x = -x
    primitive = bool(x.min() > tol)
    if strict and not primitive:
        raise NotPrimitiveError(
            f"Perron vector has non-positive entry {x.min():.3e}; the share matrix is not primitive"
        )
    v1 = x / (u1 @ x)
    return PerronPair(lam, v1, u1, res, primitive)


def _modulus_tiers(theta, gap):
    """Rank of each value's modulus, merging moduli closer than ``gap``.

    Equal moduli (e.g. +-lambda) share a tier, so the real part decides
    between them.
    """
    mod = np.abs(theta)
    idx = np.argsort(-mod)
    tiers = np.empty(len(theta), dtype=np.int64)
    tier = 0
    for k, i in enumerate(idx):
        if k and mod[idx[k - 1]] - mod[i] > gap:
            tier += 1
        tiers[i] = tier
    return tiers


def _ritz(op, n, p, tol, max_iter, seed=0):
    """Subspace iteration with Rayleigh-Ritz extraction.

    Returns Ritz values by decreasing modulus, the basis, Ritz coordinates,
    the largest residual among the checked pairs and the iteration count.
    """
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    prev = None
    res = math.inf
    for it in range(1, max_iter + 1):
        Z = op(Q)
        theta, Y = np.linalg.eig(Q.T @ Z)
        top = max(float(np.abs(theta).max()), 1e-300)
        order = np.lexsort((-theta.imag, -theta.real, _modulus_tiers(theta, 1e-6 * top)))
        theta, Y = theta[order], Y[:, order]
        # every pair on the leading circle must be resolved, and so must the rest
        # of the block bar two guard vectors, or a circle larger than the block
        # can pass for converged
        lead = int(np.count_nonzero(np.abs(theta) >= (1.0 - 1e-6) * top))
        check = p if p == n else max(lead, p - 2)
        X = Q @ Y[:, :check]
        R = op(X) - X * theta[:check]
        res = float(np.max(np.linalg.norm(R, axis=0) / np.linalg.norm(X, axis=0)))
        if prev is not None and abs(abs(theta[0]) - prev) < tol and res < 1e3 * tol:
            if lead >= p and p < n:
                raise ConvergenceError("leading circle fills the block", res)
            return theta, Q, Y, res, it
        prev = abs(theta[0])
        Q, _ = np.linalg.qr(Z)
    raise ConvergenceError("dominant transient iteration did not converge", res)




def _ritz_growing(op, n, p, tol, max_iter):
    """``_ritz`` with the block doubled after each stall.

    A stall means more eigenvalues share the leading modulus than the block
    holds (cycles in the supplier graph put many on one circle). With the
    block equal to ``n`` the Ritz values are exact.
    """
    p = min(p, n)
    while True:
        last = p >= n
        try:
            return _ritz(op, n, p, tol, max_iter if last else min(max_iter, STALL_BUDGET))
        except ConvergenceError:
            if last:
                raise
            p = min(2 * p, n)


def _real_basis(vec: np.ndarray, is_complex: bool) -> np.ndarray:
    if not is_complex:
        v = vec.real if np.linalg.norm(vec.real) >= np.linalg.norm(vec.imag) else vec.imag
        return v / np.linalg.norm(v)
    plane, _ = np.linalg.qr(np.column_stack([vec.real, vec.imag]))
    return plane


def dominant_transient(net: ProductionNetwork, tol: float = 1e-10, max_iter: int = 100_000,
                       pair: PerronPair | None = None, block: int = 5) -> TransientPair:
    """Largest-modulus non-Perron eigenvalue from block power iteration on the deflated operator.

    Left and right vectors come from the deflated ``A`` and its transpose. A
    complex pair returns orthonormal 2-column plane bases instead of vectors.
    """
    if pair is None:
        pair = perron(net, tol=tol, max_iter=max_iter, strict=False)
    lam1, v1, u1 = pair.lambda1, pair.v1, pair.u1
    A = net.A
    n = net.n
    p = min(block, n)

    def right(X):
        return A @ X - lam1 * np.outer(v1, u1 @ X)

    def left(X):
        return A.T @ X - lam1 * np.outer(u1, v1 @ X)

    theta, Q, Y, res, its = _ritz_growing(right, n, p, tol, max_iter)
    lam2 = complex(theta[0])
    mod = abs(lam2)
    scale = max(abs(lam1), 1e-300)
    is_complex = abs(lam2.imag) > 1e-8 * max(mod, 1e-300)
    if abs(lam2 - lam1) <= max(tol, 1e-6) * scale:
        raise NoSpectralGapError(f"transient eigenvalue {lam2.real:.12g} repeats the Perron root {lam1:.12g}")
    if mod >= (1.0 - 1e-8) * scale:
        warnings.warn(f"dominant transient {lam2:.6g} has the Perron modulus: the share matrix is periodic",
                      RuntimeWarning, stacklevel=2)
    tied = False
    if len(theta) > 1:
        t2 = complex(theta[1])
        conj_partner = is_complex and abs(t2 - lam2.conjugate()) <= 1e-6 * max(mod, 1e-300)
        if not conj_partner and abs(abs(t2) - mod) <= 1e-6 * max(mod, 1e-300):
            tied = True
        if is_complex and len(theta) > 2 and conj_partner:
            tied = abs(abs(complex(theta[2])) - mod) <= 1e-6 * max(mod, 1e-300)
    v_vec = Q @ Y[:, 0]
    lt, lQ, lY, lres, lits = _ritz_growing(left, n, len(theta), tol, max_iter)
    k = int(np.argmin(np.minimum(np.abs(lt - lam2), np.abs(lt - lam2.conjugate()))))
    u_vec = lQ @ lY[:, k]
    v2 = _real_basis(v_vec, is_complex)
    u2 = _real_basis(u_vec, is_complex)
    if not is_complex:
        s = float(u2 @ v2)
        if abs(s) < 1e-12:
            raise DefectivePairError("left and right transient vectors are orthogonal")
        v2 = v2 / s
    lam_out = lam2 if is_complex else complex(lam2.real, 0.0)
    return TransientPair(lam_out, mod, is_complex, tied, u2, v2, max(res, lres), its + lits)


def normalize_pair(u2, v2):
    """Rescale so ``u2 @ v2 = 1``, then give ``u2`` unit length and move its norm onto ``v2``."""
    u2 = np.asarray(u2, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    s = float(u2 @ v2)
    if s == 0.0 or abs(s) <= 1e-14 * np.linalg.norm(u2) * np.linalg.norm(v2):
        raise DefectivePairError("u2 @ v2 vanishes; the pair cannot be normalized")
    v2 = v2 / s
    nu = float(np.linalg.norm(u2))
    return u2 / nu, v2 * nu


def loading(gamma, v2_norm) -> float:
    """Aggregate loading of the transient mode, ``gamma @ v2_norm``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    v2_norm = np.asarray(v2_norm, dtype=np.float64)
    if gamma.shape != v2_norm.shape:
        raise ValueError("gamma and v2_norm differ in length")
    return float(gamma @ v2_norm)


def project_innovation(u2_norm, eps_hat):
    """Transient-mode innovation ``u2_norm @ eps_hat`` (vector in, scalar out; matrix in, series out)."""
    return np.asarray(u2_norm, dtype=np.float64) @ np.asarray(eps_hat, dtype=np.float64)


def summarize(net: ProductionNetwork, tol: float = 1e-10, max_iter: int = 100_000, strict: bool = False) -> SpectralSummary:
    """Full two-mode summary; normalized objects are ``None`` for a complex pair."""
    pair = perron(net, tol=tol, max_iter=max_iter, strict=strict)
    tr = dominant_transient(net, tol=tol, max_iter=max_iter, pair=pair)
    if tr.lambda2_complex:
        un = vn = b = None
    else:
        un, vn = normalize_pair(tr.u2, tr.v2)
        b = loading(net.gamma, vn)
    return SpectralSummary(
        lambda1=pair.lambda1,
        lambda2=tr.lambda2.real,
        lambda2_imag=tr.lambda2.imag,
        lambda2_mod=tr.lambda2_mod,
        lambda2_complex=tr.lambda2_complex,
        lambda2_tied=tr.tied,
        u2=tr.u2,
        v2=tr.v2,
        u2_norm=un,
        v2_norm=vn,
        b=b,
    )


def twomode_parameters(summary: SpectralSummary) -> tuple[float, float]:
    """``(lambda2, b)`` for the scalar reduction; complex pairs are refused."""
    if summary.lambda2_complex:
        raise ComplexModeError(
            "dominant transient is a complex pair; use the network-mode simulators instead of the scalar reduction"
        )
    return summary.lambda2, summary.b


def degree_proxy(degrees, gamma, alpha: float | None = None, n: int | None = None, u2_true=None) -> ProxyReport:
    """Centered-degree proxy for the transient direction and its loading (scale ``c = 1``)."""
    d = np.asarray(getattr(degrees, "degrees", degrees), dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    n = d.size if n is None else n
    var = float(d.var())
    if var <= 0.0:
        raise ValueError("degrees are constant; the degree proxy is degenerate")
    centered = d - d.mean()
    u2_proxy = centered / math.sqrt(d.size * var)
    b_alpha = math.sqrt(n) * float(gamma @ centered) / math.sqrt(var)
    cosine = math.nan
    if u2_true is not None:
        u = np.asarray(u2_true, dtype=np.float64)
        cosine = abs(float(u @ u2_proxy)) / float(np.linalg.norm(u))
    return ProxyReport(u2_proxy, b_alpha, 1.0, cosine)


def b_of_alpha(alpha: float, degrees, gamma) -> float:
    """Proxy loading with closed-form moments at ``alpha`` and the realized degrees held fixed."""
    d = np.asarray(getattr(degrees, "degrees", degrees), dtype=np.float64)
    mom = degree_moments(alpha, d.size)
    return math.sqrt(d.size) * float(np.asarray(gamma) @ (d - mom.mean)) / math.sqrt(mom.variance)


def log_derivative_b(alpha: float, degrees, gamma, h: float = 1e-3) -> LogDerivative:
    """Elasticity of the proxy loading in ``alpha``: direct central difference and its two-term split."""
    lo, hi = alpha - h, alpha + h
    if lo <= 1.0 or (lo <= 2.0 <= hi):
        raise ValueError("alpha +- h must stay inside (1, inf) without crossing 2")
    d = np.asarray(getattr(degrees, "degrees", degrees), dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    b0 = b_of_alpha(alpha, d, gamma)
    if abs(b0) < 1e-12:
        raise ValueError("loading vanishes at alpha; its log-derivative is undefined")
    b_lo, b_hi = b_of_alpha(lo, d, gamma), b_of_alpha(hi, d, gamma)
    if b_lo * b_hi <= 0:
        raise ValueError("loading changes sign inside the difference stencil")
    direct = (math.log(abs(b_hi)) - math.log(abs(b_lo))) / (2 * h)
    m0, m_lo, m_hi = (degree_moments(a, d.size) for a in (alpha, lo, hi))
    mean_prime = (m_hi.mean - m_lo.mean) / (2 * h)
    var_prime = (m_hi.variance - m_lo.variance) / (2 * h)
    recentering = -mean_prime / float(gamma @ (d - m0.mean))
    rescaling = -0.5 * var_prime / m0.variance
    return LogDerivative(direct, recentering + rescaling, recentering, rescaling)
