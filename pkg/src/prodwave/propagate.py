"""Shock panels and aggregate output paths: static, depth-L, micro price/quantity and scalar two-mode."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from . import kernels
from .netgen import ProductionNetwork

SOLVE_TOL = 1e-12
NEGLIGIBLE = 1e-14
CONVENTIONS = ("lagged", "current")


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class ShockPanel:
    """Innovations ``eps[i, t]`` and their double-demeaned version."""

    eps: np.ndarray
    eps_hat: np.ndarray
    sigma: float
    seed: object = None

    @property
    def n(self) -> int:
        return self.eps.shape[0]

    @property
    def T(self) -> int:
        return self.eps.shape[1]

    def __add__(self, other: "ShockPanel") -> "ShockPanel":
        return panel_from_array(self.eps + other.eps, math.hypot(self.sigma, other.sigma))


@dataclass
class OutputPath:
    """Aggregate output series with the parameters that produced it."""

    y: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    seed: object = None
    network_hash: str | None = None
    logq: np.ndarray | None = None

    def __len__(self):
        return len(self.y)


def double_demean(eps) -> np.ndarray:
    """Remove the cross-sectional mean at each date, then each firm's window mean."""
    e = np.asarray(eps, dtype=np.float64)
    e = e - e.mean(axis=0, keepdims=True)
    return e - e.mean(axis=1, keepdims=True)


def panel_from_array(eps, sigma: float = math.nan, seed=None) -> ShockPanel:
    eps = np.array(eps, dtype=np.float64, ndmin=2)
    return ShockPanel(eps, double_demean(eps), sigma, seed)


def draw_shocks(n: int, T: int, sigma: float, seed) -> ShockPanel:
    """i.i.d. ``N(0, sigma**2)`` panel of shape ``(n, T)``; ``sigma = 0`` gives the zero panel."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    eps = sigma * rng.standard_normal((n, T))
    return ShockPanel(eps, double_demean(eps), float(sigma), seed)


def _fixed_point(apply, rhs, tol, max_iter):
    """Solve ``x = rhs + apply(x)`` by Jacobi iteration (converges when the spectral radius is < 1)."""
    x = np.array(rhs, dtype=np.float64, copy=True)
    scale = max(float(np.abs(rhs).max()) if np.size(rhs) else 0.0, 1.0)
    res = math.inf
    for _ in range(max_iter):
        nxt = rhs + apply(x)
        res = float(np.abs(nxt - x).max()) if x.size else 0.0
        x = nxt
        if res <= tol * scale:
            return x
    raise SolverError(f"resolvent iteration stalled at residual {res:.3e}")


def leontief_solve(net: ProductionNetwork, rhs, tol: float = SOLVE_TOL, max_iter: int = 100_000) -> np.ndarray:
    """``(I - A)^{-1} rhs`` for a vector or a matrix of columns."""
    A = net.A
    return _fixed_point(lambda x: A @ x, np.asarray(rhs, dtype=np.float64), tol, max_iter)


def resolvent_weights(net: ProductionNetwork, tol: float = SOLVE_TOL, max_iter: int = 100_000) -> np.ndarray:
    """Row vector ``gamma^T (I - A)^{-1}``, from the transposed fixed point ``w = gamma + A^T w``."""
    At = net.A.T
    return _fixed_point(lambda w: At @ w, net.gamma, tol, max_iter)


def leontief_aggregate(net: ProductionNetwork, eps_t) -> float | np.ndarray:
    """Fully processed aggregate ``gamma^T (I - A)^{-1} eps``; columns give one value per date."""
    return net.gamma @ leontief_solve(net, eps_t)


def depth_truncated(net: ProductionNetwork, eps_t, L: int):
    """``gamma^T (I + A + ... + A^L) eps`` by L mat-vecs."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    return depth_profile(net, eps_t, L)[-1]


def depth_profile(net: ProductionNetwork, eps_t, L_max: int) -> np.ndarray:
    """Partial Neumann aggregates for depths ``0..L_max``."""
    x = np.asarray(eps_t, dtype=np.float64)
    out = np.empty((L_max + 1,) + x.shape[1:])
    acc = net.gamma @ x
    out[0] = acc
    for ell in range(1, L_max + 1):
        x = net.A @ x
        acc = acc + net.gamma @ x
        out[ell] = acc
    return out


class DepthErrorProfile(NamedTuple):
    depths: np.ndarray
    errors: np.ndarray
    bounds: np.ndarray
    slope: float
    rho: float
    C: float
    r: float


def power_norms(net: ProductionNetwork, L_max: int) -> np.ndarray:
    """Induced 1-norms ``||A^l||_1`` (largest column sum) for ``l = 0..L_max``."""
    A = net.A
    row = np.ones(net.n)
    out = np.empty(L_max + 1)
    out[0] = 1.0
    absA = abs(A)
    for ell in range(1, L_max + 1):
        row = absA.T @ row
        out[ell] = row.max()
    return out


def depth_error_profile(net: ProductionNetwork, eps_t, L_max: int = 30, rho: float | None = None,
                        margin: float = 0.05) -> DepthErrorProfile:
    """Finite-depth errors against the geometric bound ``C r^(L+1) / (1-r) ||eps||_1``.

    ``r = rho + margin`` with ``rho`` the spectral radius (``1 - beta`` unless
    given); ``C`` is the smallest constant with ``||A^l||_1 <= C r^l`` over the
    fitted range. The slope is a least-squares fit of ``log error`` on depth.
    """
    rho = 1.0 - net.beta if rho is None else rho
    r = rho + margin
    if not r < 1.0:
        raise ValueError("rho + margin must be below 1 for a finite bound")
    eps_t = np.asarray(eps_t, dtype=np.float64)
    y_star = leontief_aggregate(net, eps_t)
    y_L = depth_profile(net, eps_t, L_max)
    depths = np.arange(1, L_max + 1)
    errors = np.abs(y_star - y_L[1:])
    norms = power_norms(net, L_max)
    C = float(np.max(norms / r ** np.arange(L_max + 1)))
    bounds = C * r ** (depths + 1) / (1.0 - r) * np.abs(eps_t).sum()
    keep = errors > 1e-15 * max(abs(y_star), 1e-300)
    slope = float(np.polyfit(depths[keep], np.log(errors[keep]), 1)[0]) if keep.sum() >= 2 else -math.inf
    return DepthErrorProfile(depths, errors, bounds, slope, rho, C, r)


def _operator(net, transpose):
    return net.A.T.tocsr() if transpose else net.A


def simulate_L_economy(net: ProductionNetwork, panel: ShockPanel, L: int, transpose: bool = False,
                       demeaned: bool = False) -> OutputPath:
    """``y_t = gamma^T sum_j A^{jL} eps_{t-j}`` via ``state <- A^L state + eps_t``.

    ``transpose`` propagates along ``A^T``, the orientation of the price/quantity
    simulator. ``demeaned`` feeds the double-demeaned panel instead of raw shocks.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    op = _operator(net, transpose)
    eps = panel.eps_hat if demeaned else panel.eps
    state = np.zeros(net.n)
    y = np.empty(panel.T)
    for t in range(panel.T):
        for _ in range(L):
            state = op @ state
        state = state + eps[:, t]
        y[t] = net.gamma @ state
    return OutputPath(y, "depth_L", {"L": L, "transpose": transpose, "demeaned": demeaned},
                      panel.seed, net.digest())


def static_series(net: ProductionNetwork, panel: ShockPanel, demeaned: bool = False) -> OutputPath:
    """Per-date fully processed aggregate ``gamma^T (I - A)^{-1} eps_t``."""
    eps = panel.eps_hat if demeaned else panel.eps
    w = resolvent_weights(net)
    return OutputPath(w @ eps, "static", {"demeaned": demeaned}, panel.seed, net.digest())


def _check_lambda(lambda2):
    if isinstance(lambda2, complex):
        if lambda2.imag != 0:
            raise ValueError("complex transient eigenvalue: the scalar reduction is refused")
        lambda2 = lambda2.real
    lambda2 = float(lambda2)
    if not 0.0 <= lambda2 < 1.0:
        raise ValueError(f"lambda2 must lie in [0, 1), got {lambda2}")
    return lambda2


def reduced_state(lambda2: float, eta, convention: str = "lagged"):
    """Transient-mode state for a scalar stream (last axis is time).

    ``lagged``: ``s_0 = 0`` and ``s_t = lambda2 s_{t-1} + eta_{t-1}``.
    ``current``: ``s_t = lambda2 s_{t-1} + eta_t`` starting from rest, i.e. ``s = K eta``.
    """
    lambda2 = _check_lambda(lambda2)
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    eta = np.asarray(eta, dtype=np.float64)
    if convention == "current":
        return kernels.ar1_filter(eta, lambda2)
    shifted = np.zeros_like(eta)
    shifted[..., 1:] = eta[..., :-1]
    return kernels.ar1_filter(shifted, lambda2)


def simulate_reduced(lambda2: float, b: float, eta, convention: str = "lagged", seed=None) -> OutputPath:
    """Scalar two-mode output ``y_t = b s_t``."""
    s = reduced_state(lambda2, eta, convention)
    return OutputPath(b * s, "reduced", {"lambda2": float(lambda2), "b": float(b), "convention": convention}, seed)


def static_series_reduced(lambda2: float, b: float, eta, seed=None) -> OutputPath:
    """Two-mode static benchmark ``b / (1 - lambda2) * eta_t``."""
    lambda2 = _check_lambda(lambda2)
    y = b / (1.0 - lambda2) * np.asarray(eta, dtype=np.float64)
    return OutputPath(y, "static", {"lambda2": lambda2, "b": float(b)}, seed)


class Interference(NamedTuple):
    delta_y_star: float
    correction: float
    depth_gap: float


def interference_decomposition(net: ProductionNetwork, panel: ShockPanel, t: int, L: int) -> Interference:
    """Split the depth-L increment at date ``t`` into static increment, vintage interference and depth gap.

    ``delta_y_star + correction + depth_gap`` equals ``y_t - y_{t-1}`` of
    ``simulate_L_economy``. With ``D = sum_j A^{jL}`` (so ``D = (I - A)^{-1}``
    only when ``L = 1``) the depth gap is ``gamma^T (D - (I - A)^{-1}) de_t``.
    Shocks before date 0 are zero.
    """
    if t < 2:
        raise ValueError("t must be at least 2")
    if L < 1:
        raise ValueError("L must be at least 1")
    eps = panel.eps

    def d_eps(s):
        cur = eps[:, s] if 0 <= s < panel.T else np.zeros(net.n)
        prev = eps[:, s - 1] if 1 <= s <= panel.T else np.zeros(net.n)
        return cur - prev

    w_static = resolvent_weights(net)
    de_t = d_eps(t)
    delta_star = float(w_static @ de_t)
    # row vectors gamma^T A^{jL}
    g = net.gamma.copy()
    At = net.A.T
    correction = 0.0
    lag_sum = np.zeros(net.n)
    for j in range(1, t + 1):
        for _ in range(L):
            g = At @ g
        lag_sum += g
        correction += float(g @ (d_eps(t - j) - de_t))
        if np.abs(g).sum() < NEGLIGIBLE:
            break
    # untruncated tail of sum_j A^{jL} applied to de_t beyond the history length
    tail = np.zeros(net.n)
    gg = g.copy()
    while np.abs(gg).sum() >= NEGLIGIBLE:
        for _ in range(L):
            gg = At @ gg
        tail += gg
    # vintages older than the panel have zero increments, leaving -A^{jL} de_t in the correction
    correction -= float(tail @ de_t)
    depth_gap = float((net.gamma + lag_sum + tail - w_static) @ de_t)
    return Interference(delta_star, correction, depth_gap)


@dataclass
class MicroPath(OutputPath):
    det: np.ndarray | None = None
    prices: np.ndarray | None = None
    recursion: dict = field(default_factory=dict)


def micro_constants(net: ProductionNetwork, wage: float = 1.0):
    """Nominal sizes, technology constant and the deterministic drift of the log-quantity recursion."""
    A = net.A
    m_bar = leontief_solve(net, net.gamma * wage)
    if m_bar.min() <= 0:
        raise SolverError("nominal sizes must be positive")
    coo = A.tocoo()
    alogA = np.zeros(net.n)
    np.add.at(alogA, coo.col, coo.data * np.log(coo.data))
    beta = net.beta
    theta = (beta * math.log(beta) if beta > 0 else 0.0) + alogA
    log_m = np.log(m_bar)
    drift = theta + log_m - A.T @ log_m - beta * math.log(wage)
    return m_bar, theta, drift


def steady_state_logq(net: ProductionNetwork, drift) -> np.ndarray:
    """Zero-shock fixed point of ``x = A^T x + drift``."""
    At = net.A.T.tocsr()
    return _fixed_point(lambda x: At @ x, drift, SOLVE_TOL, 100_000)


def simulate_micro(net: ProductionNetwork, panel: ShockPanel, T: int | None = None, q0=None,
                   wage: float = 1.0) -> MicroPath:
    """Iterate market-clearing prices, input demands and Cobb-Douglas production.

    Date ``t`` shocks produce quantities at ``t + 1``; the returned ``y`` has
    length ``T`` with ``y[t] = gamma^T (log q_{t+1} - det_{t+1})`` where
    ``det`` is the zero-shock path from the same ``q_0`` (default: steady state).
    """
    T = panel.T if T is None else T
    if T > panel.T:
        raise ValueError("panel is shorter than T")
    A = net.A
    coo = A.tocoo()
    sup, buy, a = coo.row, coo.col, coo.data
    m_bar, theta, drift = micro_constants(net, wage)
    nominal_demand = A @ m_bar + net.gamma * wage
    if q0 is None:
        logq = steady_state_logq(net, drift)
    else:
        q0 = np.asarray(q0, dtype=np.float64)
        if q0.min() <= 0:
            raise ValueError("initial quantities must be strictly positive")
        logq = np.log(q0)
    beta = net.beta
    At = A.T.tocsr()
    logq_path = np.empty((net.n, T + 1))
    det_path = np.empty((net.n, T + 1))
    price_path = np.empty((net.n, T))
    logq_path[:, 0] = logq
    det_path[:, 0] = logq
    det = logq.copy()
    labor = beta * m_bar / wage
    for t in range(T):
        q = np.exp(logq)
        p = nominal_demand / q
        x = a * m_bar[buy] / p[sup]
        if not (np.all(np.isfinite(p)) and p.min() > 0 and (x.size == 0 or x.min() > 0)):
            raise SolverError(f"non-positive or non-finite price/input at date {t}")
        log_cd = np.zeros(net.n)
        np.add.at(log_cd, buy, a * np.log(x))
        logq = panel.eps[:, t] + beta * np.log(labor) + log_cd
        if not np.all(np.isfinite(logq)):
            raise SolverError(f"non-finite quantity at date {t + 1}")
        det = At @ det + drift
        logq_path[:, t + 1] = logq
        det_path[:, t + 1] = det
        price_path[:, t] = p
    y = net.gamma @ (logq_path[:, 1:] - det_path[:, 1:])
    return MicroPath(y, "micro", {"wage": wage}, panel.seed, net.digest(), logq=logq_path,
                     det=det_path, prices=price_path,
                     recursion={"drift": drift, "theta": theta, "m_bar": m_bar})


def recursion_residual(net: ProductionNetwork, path: MicroPath, panel: ShockPanel) -> np.ndarray:
    """Per-step max deviation from ``log q_{t+1} = A^T log q_t + eps_t + drift``."""
    drift = path.recursion["drift"]
    lq = path.logq
    pred = net.A.T @ lq[:, :-1] + panel.eps[:, : lq.shape[1] - 1] + drift[:, None]
    return np.abs(lq[:, 1:] - pred).max(axis=0)
