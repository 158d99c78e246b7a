"""Attenuation tables, implied granular shares and the tail-exponent sensitivity split."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, asdict
from typing import Callable

import numpy as np

from .riskstats import attenuation_ratio, finite_T_spectra
from .spectral import b_of_alpha

DEFAULT_GRID = tuple(round(0.2 + 0.1 * k, 10) for k in range(7))
DEFAULT_SHARES = (0.10, 0.33)
NEGLIGIBLE_SHARE = 0.06
SHARE_WORDS = ((1 / 2, "one-half"), (1 / 3, "one-third"), (1 / 4, "one-quarter"), (1 / 5, "one-fifth"),
               (1 / 6, "one-sixth"), (1 / 8, "one-eighth"), (1 / 10, "one-tenth"))


class CrossingError(RuntimeError):
    """Eigenvalue ordering changed inside the difference stencil at every tried step."""


@dataclass(frozen=True)
class CalibrationRow:
    lambda2: float
    R: float
    static_share: float | None = None
    dynamic_share: float | None = None


@dataclass(frozen=True)
class CalibrationTable:
    rows: tuple[CalibrationRow, ...]

    def to_records(self) -> list[dict]:
        return [asdict(r) for r in self.rows]


@dataclass(frozen=True)
class SensitivityReport:
    alpha: float
    exposure_channel: float
    overlap_channel: float
    total: float
    nu_prime: np.ndarray
    lambda2: float
    lambda2_prime: float
    b: float
    b_prime: float
    h_used: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nu_prime"] = self.nu_prime.tolist()
        return d


def attenuation_table(lambda2_grid=DEFAULT_GRID, static_shares=None) -> CalibrationTable:
    """``R`` per grid point; with shares, one row per ``(lambda2, share)`` pair."""
    rows = []
    for lam in lambda2_grid:
        if not 0.0 < lam < 1.0:
            raise ValueError(f"grid point {lam} outside (0, 1)")
        R = attenuation_ratio(lam)
        if static_shares is None:
            rows.append(CalibrationRow(float(lam), R))
        else:
            for s in static_shares:
                rows.append(CalibrationRow(float(lam), R, float(s), granular_share(s, lam)))
    return CalibrationTable(tuple(rows))


def granular_share(static_share: float, lambda2: float) -> float:
    """Share of aggregate volatility left to granular shocks once overlap is accounted for."""
    if not 0.0 < static_share <= 1.0:
        raise ValueError("static_share must lie in (0, 1]")
    return static_share * attenuation_ratio(lambda2)


def describe_share(share: float, rel_tol: float = 0.15) -> str:
    """Nearest simple fraction in words, e.g. ``"≈ one-sixth"``.

    Shares at or below ``NEGLIGIBLE_SHARE`` read ``"close to zero"``; others with no fraction
    within ``rel_tol`` are printed as a decimal.
    """
    if share < 0:
        raise ValueError("share must be nonnegative")
    if share <= NEGLIGIBLE_SHARE:
        return "close to zero"
    best = min(SHARE_WORDS, key=lambda fw: abs(math.log(share / fw[0])))
    if abs(share / best[0] - 1.0) > rel_tol:
        return f"≈ {share:.2f}"
    return f"≈ {best[1]}"


def lambda2_mapping(spec) -> Callable[[float], float]:
    """Build ``lambda2(alpha)`` from ``{"type": "linear", ...}`` or ``{"type": "table", "points": [[a, l], ...]}``.

    A callable is passed through.
    """
    if callable(spec):
        return spec
    kind = spec.get("type")
    if kind == "linear":
        a0 = float(spec.get("alpha0", 0.0))
        intercept, slope = float(spec["intercept"]), float(spec["slope"])
        return lambda alpha: intercept + slope * (alpha - a0)
    if kind == "table":
        pts = np.asarray(spec["points"], dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("table mapping needs at least two [alpha, lambda2] points")
        order = np.argsort(pts[:, 0])
        xs, ys = pts[order, 0], pts[order, 1]
        return lambda alpha: float(np.interp(alpha, xs, ys))
    raise ValueError(f"unknown mapping type {kind!r}; use 'linear' or 'table'")


def _nu(lam, T):
    return finite_T_spectra(lam, T, check=False).nu


def _kinks(lo, mid, hi, tol=0.5):
    """Second differences and a mask of components that look kinked.

    Sorted eigenvalue curves are smooth unless two of them cross, which leaves
    a kink: there the second difference stays comparable to the first, while
    on a smooth curve it shrinks with the step.
    """
    second = np.abs(hi - 2.0 * mid + lo)
    first = 0.5 * np.abs(hi - lo)
    return second, second > tol * first + 1e-12 * (1.0 + np.abs(mid))


def sensitivity_decomposition(alpha: float, lambda2_of_alpha, degrees, gamma, sigma: float = 1.0,
                              b_scale: float = 1.0, T: int = 100, h: float = 1e-3,
                              max_halvings: int = 3) -> SensitivityReport:
    """Split ``dE[phi_hat]/dalpha`` into exposure (through the loading) and overlap (through lambda2).

    ``b(alpha) = b_scale * b_of_alpha(alpha)`` with the realized degrees held
    fixed. Eigenvalue derivatives are order-matched central differences. A
    kink in a sorted eigenvalue curve (a crossing) halves the step; a
    component whose second difference then falls quadratically is smooth.
    """
    mapping = lambda2_mapping(lambda2_of_alpha)
    lam = float(mapping(alpha))
    lam_prime = (mapping(alpha + h) - mapping(alpha - h)) / (2 * h)
    for a in (alpha - h, alpha + h):
        if not 0.0 < mapping(a) < 1.0:
            raise ValueError("lambda2(alpha +- h) must stay inside (0, 1)")
    if lam_prime >= 0:
        warnings.warn(
            f"lambda2'(alpha) = {lam_prime:.4g} is not negative; fatter tails would speed up mixing",
            RuntimeWarning,
            stacklevel=2,
        )
    b = b_scale * b_of_alpha(alpha, degrees, gamma)
    b_prime = b_scale * (b_of_alpha(alpha + h, degrees, gamma) - b_of_alpha(alpha - h, degrees, gamma)) / (2 * h)
    nu_mid = _nu(lam, T)
    step = h
    prev_second = None
    for _ in range(max_halvings + 1):
        d_lam = step * max(abs(lam_prime), 1e-300)
        if d_lam == 0 or lam_prime == 0:
            dnu = np.zeros_like(nu_mid)
            break
        lo_l, hi_l = lam - d_lam, lam + d_lam
        if not (0.0 <= lo_l and hi_l < 1.0):
            raise ValueError("lambda2 stencil leaves [0, 1)")
        nu_lo, nu_hi = _nu(lo_l, T), _nu(hi_l, T)
        second, suspect = _kinks(nu_lo, nu_mid, nu_hi)
        if prev_second is not None:
            # halving the step cuts a smooth second difference about fourfold, a kink's only twofold
            suspect &= second > prev_second / 3.0
        if not suspect.any():
            dnu = (nu_hi - nu_lo) / (2 * d_lam)
            break
        prev_second = second
        step /= 2
    else:
        raise CrossingError(f"eigenvalue ordering unstable after {max_halvings} step halvings")
    nu_prime = dnu * lam_prime
    k = T - 1
    exposure = sigma**2 * 2.0 * b * b_prime * nu_mid.sum() / k
    overlap = sigma**2 * b * b * nu_prime.sum() / k
    return SensitivityReport(alpha, exposure, overlap, exposure + overlap, nu_prime, lam, lam_prime, b, b_prime, step)


def expected_phi_hat(alpha: float, lambda2_of_alpha, degrees, gamma, sigma: float = 1.0, b_scale: float = 1.0,
                     T: int = 100) -> float:
    """``sigma^2 b(alpha)^2 (1/(T-1)) sum nu_j(lambda2(alpha))`` evaluated directly."""
    mapping = lambda2_mapping(lambda2_of_alpha)
    b = b_scale * b_of_alpha(alpha, degrees, gamma)
    return sigma**2 * b * b * _nu(mapping(alpha), T).sum() / (T - 1)
