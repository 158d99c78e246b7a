"""Volatility and tail-risk objects: population formulas, window estimators and finite-window sampling laws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import erfc

from .netgen import ProductionNetwork
from .propagate import OutputPath, resolvent_weights, reduced_state
from .symeig import eigh_symmetric, tridiagonal_eigvals

RESIDUAL_CHECK_MAX_T = 256


def _series(path) -> np.ndarray:
    return np.asarray(path.y if isinstance(path, OutputPath) else path, dtype=np.float64)


def _unit_interval(lambda2, closed_left=False):
    lambda2 = float(lambda2)
    ok = (0.0 <= lambda2 < 1.0) if closed_left else (0.0 < lambda2 < 1.0)
    if not ok:
        raise ValueError(f"lambda2 = {lambda2} outside the admissible range")
    return lambda2


# population objects ---------------------------------------------------------

def population_static_variance(net: ProductionNetwork, sigma: float) -> float:
    """``2 sigma^2 ||gamma^T (I - A)^{-1}||^2``."""
    w = resolvent_weights(net)
    return 2.0 * sigma**2 * float(w @ w)


def population_L_variance(net: ProductionNetwork, sigma: float, L: int, tol: float = 1e-15) -> float:
    """Stationary ``Var(dy)`` of the depth-L economy.

    ``dy_t = gamma^T [eps_t + sum_{j>=1} (A^{jL} - A^{(j-1)L}) eps_{t-j}]`` so the
    variance is ``sigma^2 (||gamma||^2 + sum_{j>=1} ||gamma^T (A^{jL} - A^{(j-1)L})||^2)``.
    The series stops once a term falls below ``tol`` times the running total.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    At = net.A.T
    g_prev = net.gamma.copy()
    total = float(g_prev @ g_prev)
    for _ in range(1_000_000):
        g = g_prev
        for _ in range(L):
            g = At @ g
        diff = g - g_prev
        term = float(diff @ diff)
        total += term
        g_prev = g
        if term <= tol * total:
            break
    return sigma**2 * total


def twomode_variances(b: float, lambda2: float, sigma: float) -> tuple[float, float]:
    """Increment variances ``(dynamic, static)`` of the scalar reduction."""
    lambda2 = _unit_interval(lambda2, closed_left=True)
    phi = 2.0 * b**2 * sigma**2 / (1.0 + lambda2)
    phi_star = 2.0 * b**2 * sigma**2 / (1.0 - lambda2) ** 2
    return phi, phi_star


def attenuation_ratio(lambda2: float) -> float:
    """Dynamic-to-static increment variance ratio ``(1 - lambda2)^2 / (1 + lambda2)``."""
    lambda2 = float(lambda2)
    if lambda2 == 0.0:
        return 1.0
    _unit_interval(lambda2)
    return (1.0 - lambda2) ** 2 / (1.0 + lambda2)


def level_ratio(lambda2: float) -> float:
    """Dynamic-to-static level variance ratio ``(1 - lambda2) / (1 + lambda2)``."""
    lambda2 = _unit_interval(lambda2, closed_left=True)
    return (1.0 - lambda2) / (1.0 + lambda2)


def std_normal_lower(z):
    """``Phi(-z)`` through ``erfc`` (relative accuracy near machine precision far into the tail)."""
    return 0.5 * erfc(np.asarray(z, dtype=np.float64) / math.sqrt(2.0))


def gaussian_tail(phi: float, c):
    """``P(dy < -c)`` for ``dy ~ N(0, phi)``."""
    if not phi > 0:
        raise ValueError("phi must be positive")
    out = std_normal_lower(np.asarray(c, dtype=np.float64) / math.sqrt(phi))
    return float(out) if np.ndim(out) == 0 else out


def tail_ratio(kappa: float, x: float) -> tuple[float, float]:
    """Static-to-dynamic tail probability ratio at a threshold of ``x`` static standard deviations.

    Returns ``(exact, asymptotic)`` with exact ``Phi(-x sqrt(kappa)) / Phi(-x)``
    and the large-``x`` form ``kappa^(-1/2) exp(x^2 (1 - kappa) / 2)``.
    """
    if not 0.0 < kappa <= 1.0 or not x > 0:
        raise ValueError("need 0 < kappa <= 1 and x > 0")
    exact = float(std_normal_lower(x * math.sqrt(kappa)) / std_normal_lower(x))
    asym = kappa**-0.5 * math.exp(0.5 * x * x * (1.0 - kappa))
    return exact, asym


# window estimators ----------------------------------------------------------

def realized_volatility(path, demean: bool = True) -> float:
    """``(1/(T-1)) sum_{t=2..T} (dy_t - mean dy)^2``; ``demean=False`` keeps the raw second moment."""
    y = _series(path)
    if y.size < 3:
        raise ValueError("need at least three observations")
    dy = np.diff(y)
    if demean:
        dy = dy - dy.mean()
    return float(dy @ dy) / dy.size


def realized_volatility_batch(y, demean: bool = True) -> np.ndarray:
    """Row-wise ``realized_volatility`` for a stack of windows."""
    dy = np.diff(np.asarray(y, dtype=np.float64), axis=-1)
    if demean:
        dy = dy - dy.mean(axis=-1, keepdims=True)
    return np.einsum("...t,...t->...", dy, dy) / dy.shape[-1]


def realized_tail(path, c: float) -> float:
    """Fraction of increments below ``-c``."""
    if not c > 0:
        raise ValueError("c must be positive")
    dy = np.diff(_series(path))
    if dy.size == 0:
        raise ValueError("need at least two observations")
    return float(np.count_nonzero(dy < -c)) / dy.size


# finite-window quadratic forms ----------------------------------------------

def build_overlap_matrices(lambda2: float, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Overlap operator ``K[t, q] = lambda2^(t-q)`` for ``q <= t`` and the ``(T-1) x T`` difference matrix."""
    if T < 2:
        raise ValueError("T must be at least 2")
    idx = np.arange(T)
    lag = idx[:, None] - idx[None, :]
    K = np.where(lag >= 0, float(lambda2) ** np.maximum(lag, 0), 0.0)
    D = np.zeros((T - 1, T))
    D[idx[:-1], idx[:-1]] = -1.0
    D[idx[:-1], idx[1:]] = 1.0
    return K, D


def overlap_trace_closed_form(lambda2: float, T: int) -> float:
    """``trace(D K K^T D^T) = sum_{t=1}^{T-1} [1 + (1-l)/(1+l) (1 - l^(2t))]``."""
    t = np.arange(1, T)
    lam = float(lambda2)
    return float(np.sum(1.0 + (1.0 - lam) / (1.0 + lam) * (1.0 - lam ** (2 * t))))


@dataclass(frozen=True)
class FiniteTSpectrum:
    """Eigenvalues (descending) of the static and dynamic window quadratic forms."""

    T: int
    lambda2: float
    nu_star: np.ndarray
    nu: np.ndarray

    @property
    def nu_max(self) -> float:
        return float(self.nu[0])

    def to_dict(self) -> dict:
        return {"T": self.T, "lambda2": self.lambda2, "nu_star": self.nu_star.tolist(),
                "nu": self.nu.tolist(), "nu_max": self.nu_max}


def finite_T_spectra(lambda2: float, T: int, check: bool | None = None) -> FiniteTSpectrum:
    """Eigenvalues of ``M* = D D^T`` and ``M = D K K^T D^T``.

    ``M*`` is already tridiagonal and goes straight to implicit QL. ``M`` uses
    Jacobi for ``T - 1 <= 64`` and Householder + QL above. With ``check``
    (default for ``T <= 256``) eigenvectors are formed and each pair must meet
    ``||M x - nu x|| <= 1e-9 ||M||``. Both trace identities are enforced.
    """
    lambda2 = float(lambda2)
    K, D = build_overlap_matrices(lambda2, T)
    check = T <= RESIDUAL_CHECK_MAX_T if check is None else check
    nu_star = tridiagonal_eigvals(np.full(T - 1, 2.0), np.full(T - 2, -1.0))
    DK = D @ K
    M = DK @ DK.T
    nu, _ = eigh_symmetric(M, vectors=check, residual_tol=1e-9)
    nu_star = np.maximum(nu_star, 0.0)
    nu = np.maximum(nu, 0.0)
    trace_star, trace = 2.0 * (T - 1), float(np.trace(M))
    for name, got, want in (("M*", nu_star.sum(), trace_star), ("M", nu.sum(), trace)):
        if abs(got - want) > 1e-9 * max(1.0, want):
            raise ArithmeticError(f"eigenvalues of {name} miss the trace: {got!r} vs {want!r}")
    return FiniteTSpectrum(T, lambda2, nu_star, nu)


def expected_window_variances(b: float, lambda2: float, sigma: float, T: int) -> tuple[float, float]:
    """Exact ``(E[phi_hat], E[phi_hat*])`` of the undemeaned window statistics.

    The dynamic mean is the squared Frobenius norm of ``D K``. Row ``t`` of
    ``D K`` holds ``(lambda2 - 1) lambda2^k`` for ``k = 0..t`` and a trailing 1,
    so the norm accumulates in O(T) without forming the matrices.
    """
    if T < 2:
        raise ValueError("T must be at least 2")
    lam = float(lambda2)
    powers = lam ** (2.0 * np.arange(T - 1))
    row_sq = 1.0 + (1.0 - lam) ** 2 * np.cumsum(powers)
    e_dyn = sigma**2 * b**2 * float(row_sq.sum()) / (T - 1)
    e_stat = sigma**2 * b**2 / (1.0 - lam) ** 2 * 2.0
    return e_dyn, e_stat


def sample_quadratic_form(spectrum: FiniteTSpectrum, b: float, sigma: float, draws: int, seed,
                          chunk: int = 20_000) -> tuple[np.ndarray, np.ndarray]:
    """Draws of ``(phi_hat*, phi_hat)`` from their weighted chi-square laws with shared normals.

    The same ``Z`` multiplies both eigenvalue lists, each sorted descending.
    """
    if draws < 1:
        raise ValueError("draws must be positive")
    rng = np.random.default_rng(seed)
    k = spectrum.T - 1
    lam = spectrum.lambda2
    scale_dyn = sigma**2 * b**2 / k
    scale_stat = scale_dyn / (1.0 - lam) ** 2
    stat = np.empty(draws)
    dyn = np.empty(draws)
    for start in range(0, draws, chunk):
        stop = min(draws, start + chunk)
        Z2 = rng.standard_normal((stop - start, k)) ** 2
        stat[start:stop] = scale_stat * (Z2 @ spectrum.nu_star)
        dyn[start:stop] = scale_dyn * (Z2 @ spectrum.nu)
    return stat, dyn


def fosd_check(spectrum: FiniteTSpectrum, lambda2: float | None = None, draws: int = 0, seed=None) -> dict:
    """Sufficient dominance condition ``nu_max <= (1 - lambda2)^-2`` and, optionally, a coupled-draw count.

    ``termwise_holds`` compares the descending lists, ``nu_j <= nu*_j / (1 - lambda2)^2``,
    which is the pathwise requirement for the shared-normal coupling.
    """
    lam = spectrum.lambda2 if lambda2 is None else float(lambda2)
    if lambda2 is not None and abs(lam - spectrum.lambda2) > 1e-15:
        raise ValueError("spectrum was built at a different lambda2")
    bound = 1.0 / (1.0 - lam) ** 2
    out = {
        "condition_holds": bool(spectrum.nu_max <= bound),
        "nu_max": spectrum.nu_max,
        "bound": bound,
        "termwise_holds": bool(np.all(spectrum.nu <= spectrum.nu_star * bound * (1 + 1e-12) + 1e-12)),
    }
    if draws:
        stat, dyn = sample_quadratic_form(spectrum, 1.0, 1.0, draws, seed)
        gap = stat - dyn
        out["draws"] = draws
        out["violations"] = int(np.count_nonzero(gap < -1e-12))
        out["min_gap"] = float(gap.min())
    return out


# overshooting -------------------------------------------------------------------

SIGN_CLASSES = ("same_positive", "same_negative", "dynamic_up_static_down", "dynamic_down_static_up")


def reversal_indicator(s_prev, eta_prev, eta_t, lambda2: float, b: float = 1.0, margin: float = 0.0):
    """``|dy_t| > |dy*_t| + margin`` with ``dy_t = b((lambda2-1) s_{t-1} + eta_{t-1})``
    and ``dy*_t = b (eta_t - eta_{t-1}) / (1 - lambda2)``."""
    dy = b * ((lambda2 - 1.0) * np.asarray(s_prev) + np.asarray(eta_prev))
    dy_star = b * (np.asarray(eta_t) - np.asarray(eta_prev)) / (1.0 - lambda2)
    return np.abs(dy) > np.abs(dy_star) + margin


def overshoot_diagnostics(lambda2: float, b: float, sigma: float, n_scaling: float, T: int, reps: int,
                          margin: float, seed, convention: str = "lagged") -> dict:
    """Frequency with which the dynamic increment outruns the static one at the last date of a window.

    Each replication draws ``eta_1..eta_T ~ N(0, sigma^2 / n_scaling)``; the
    static path is ``b eta_t / (1 - lambda2)``. Replications are independent, so
    the rates carry binomial standard errors.
    """
    lambda2 = _unit_interval(lambda2, closed_left=True)
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    if T < 2:
        raise ValueError("T must be at least 2")
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal((reps, T)) * (sigma / math.sqrt(n_scaling))
    s = reduced_state(lambda2, eta, convention)
    dy = b * (s[:, -1] - s[:, -2])
    dy_star = b / (1.0 - lambda2) * (eta[:, -1] - eta[:, -2])
    over = np.abs(dy) > np.abs(dy_star)
    over_m = np.abs(dy) > np.abs(dy_star) + margin
    counts = {
        "same_positive": int(np.count_nonzero(over & (dy > 0) & (dy_star > 0))),
        "same_negative": int(np.count_nonzero(over & (dy < 0) & (dy_star < 0))),
        "dynamic_up_static_down": int(np.count_nonzero(over & (dy > 0) & (dy_star <= 0))),
        "dynamic_down_static_up": int(np.count_nonzero(over & (dy < 0) & (dy_star >= 0))),
    }
    rate_any = float(over.mean())
    rate_margin = float(over_m.mean())
    return {
        "rate_any": rate_any,
        "rate_margin": rate_margin,
        "se_any": math.sqrt(rate_any * (1 - rate_any) / reps),
        "se_margin": math.sqrt(rate_margin * (1 - rate_margin) / reps),
        "sign_counts": counts,
        "reps": reps,
        "convention": convention,
    }


# levels versus increments ----------------------------------------------------

def burn_in(lambda2: float) -> int:
    return int(math.ceil(50.0 / (1.0 - lambda2)))


def levels_vs_increments(lambda2: float, b: float, sigma: float, T: int, seed, convention: str = "current") -> dict:
    """Simulated level and increment variance ratios against their closed forms."""
    lambda2 = _unit_interval(lambda2, closed_left=True)
    burn = burn_in(lambda2)
    rng = np.random.default_rng(seed)
    eta = sigma * rng.standard_normal(T + burn)
    y = b * reduced_state(lambda2, eta, convention)[burn:]
    y_star = b / (1.0 - lambda2) * eta[burn:]
    ratio_levels = float(np.var(y) / np.var(y_star))
    ratio_incr = float(np.var(np.diff(y)) / np.var(np.diff(y_star)))
    return {
        "ratio_levels": ratio_levels,
        "ratio_increments": ratio_incr,
        "closed_form": {"levels": level_ratio(lambda2), "increments": attenuation_ratio(lambda2)},
        "burn_in": burn,
        "var_dy": float(np.var(np.diff(y))),
    }


# reports -------------------------------------------------------------------------

@dataclass
class RiskReport:
    phi: float
    phi_star: float
    phi_hat: float
    phi_hat_star: float
    omega_c: float
    omega_c_star: float
    omega_hat_c: float
    omega_hat_c_star: float
    R: float
    kappa: float
    c: float
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _tail_or_zero(phi, c):
    return gaussian_tail(phi, c) if phi > 0 else 0.0


def risk_report(y_dynamic, y_static, phi: float, phi_star: float, c: float, meta: dict | None = None) -> RiskReport:
    """Population values alongside window estimates for one coupled pair of paths."""
    if phi_star > 0:
        kappa = phi / phi_star
    else:
        # a zero panel carries no risk in either regime
        kappa = 0.0 if phi == 0 else math.nan
    lam = (meta or {}).get("lambda2")
    R = attenuation_ratio(lam) if lam is not None else kappa
    return RiskReport(
        phi=phi,
        phi_star=phi_star,
        phi_hat=realized_volatility(y_dynamic),
        phi_hat_star=realized_volatility(y_static),
        omega_c=_tail_or_zero(phi, c),
        omega_c_star=_tail_or_zero(phi_star, c),
        omega_hat_c=realized_tail(y_dynamic, c),
        omega_hat_c_star=realized_tail(y_static, c),
        R=R,
        kappa=kappa,
        c=c,
        meta=dict(meta or {}),
    )
