"""Production networks: truncated power-law degrees, share matrices, edge-list I/O.

Orientation: ``A[j, i]`` is the share of buyer ``i``'s expenditure spent on
supplier ``j``, so every column sums to ``1 - beta``.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

COLSUM_TOL = 1e-12
GAMMA_MODES = ("uniform", "degree-proportional")
ALIGNMENTS = ("uniform", "degree-proportional")


class NetworkError(ValueError):
    """Invalid network data or parameters."""


@dataclass(frozen=True)
class DegreeSequence:
    """Number of suppliers per firm, drawn from a truncated power law."""

    degrees: np.ndarray
    alpha: float
    d_max: int

    def __post_init__(self):
        d = np.asarray(self.degrees)
        if d.ndim != 1 or d.size == 0:
            raise NetworkError("degrees must be a non-empty vector")
        if not np.issubdtype(d.dtype, np.integer):
            if not np.all(d == np.floor(d)):
                raise NetworkError("degrees must be integers")
            d = d.astype(np.int64)
        if d.min() < 1 or d.max() > self.d_max:
            raise NetworkError(f"degrees must lie in [1, {self.d_max}]")
        d.setflags(write=False)
        object.__setattr__(self, "degrees", d)

    @property
    def n(self) -> int:
        return int(self.degrees.size)


@dataclass(frozen=True)
class DegreeMoments:
    """Closed-form moments of the continuous truncated Pareto on [1, n**(1/alpha)].

    ``psi_alpha`` scales the first moment and ``psi_second`` the second
    moment relative to their untruncated values.
    """

    mean: float
    variance: float
    psi_alpha: float
    psi_second: float
    second_moment: float


@dataclass(frozen=True)
class ProductionNetwork:
    """Immutable economy: share matrix, labor share, consumption weights."""

    A: sp.csr_array
    beta: float
    gamma: np.ndarray
    degrees: DegreeSequence | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        A = sp.csr_array(self.A, dtype=np.float64)
        A.sum_duplicates()
        A.eliminate_zeros()
        n = A.shape[0]
        if A.shape != (n, n):
            raise NetworkError("share matrix must be square")
        if not 0.0 < self.beta <= 1.0:
            raise NetworkError("beta must lie in (0, 1]")
        if A.nnz and A.data.min() < 0:
            raise NetworkError("share matrix has negative entries")
        if np.any(A.diagonal() != 0):
            raise NetworkError("share matrix has self-supply on the diagonal")
        colsum = np.asarray(A.sum(axis=0)).ravel()
        bad = np.flatnonzero(np.abs(colsum - (1.0 - self.beta)) > COLSUM_TOL)
        if bad.size:
            raise NetworkError(f"column of firm {bad[0]} sums to {colsum[bad[0]]!r}, expected {1.0 - self.beta!r}")
        gamma = np.array(self.gamma, dtype=np.float64)
        if gamma.shape != (n,):
            raise NetworkError("gamma must have one entry per firm")
        if gamma.min() < 0 or abs(gamma.sum() - 1.0) > COLSUM_TOL:
            raise NetworkError("gamma must be nonnegative and sum to 1")
        gamma.setflags(write=False)
        A.data.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def dense(self) -> np.ndarray:
        return self.A.toarray()

    def digest(self) -> str:
        """SHA-256 over the share matrix, beta and gamma (bitwise)."""
        h = hashlib.sha256()
        coo = self.A.tocoo()
        order = np.lexsort((coo.row, coo.col))
        for arr in (coo.row[order].astype(np.int64), coo.col[order].astype(np.int64), coo.data[order], self.gamma):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(np.float64(self.beta).tobytes())
        return h.hexdigest()


def _check_alpha(alpha: float) -> None:
    if not alpha > 1.0:
        raise NetworkError(f"alpha must be > 1 (got {alpha}); the tail is not normalizable otherwise")


def degree_cutoff(n: int, alpha: float) -> int:
    """Largest integer k with k**alpha <= n, i.e. floor(n**(1/alpha)) without rounding slips."""
    k = max(int(math.floor(n ** (1.0 / alpha))), 1)
    while (k + 1) ** alpha <= n * (1 + 1e-12):
        k += 1
    while k > 1 and k ** alpha > n * (1 + 1e-12):
        k -= 1
    return k


def sample_degrees(n: int, alpha: float, seed) -> DegreeSequence:
    """Draw ``n`` degrees from the discrete truncated Pareto on ``[1, floor(n**(1/alpha))]``.

    Continuous Pareto draws ``U**(-1/alpha)`` are rounded down; values above the
    cutoff are redrawn.
    """
    if n < 2:
        raise NetworkError("n must be at least 2")
    _check_alpha(alpha)
    d_max = degree_cutoff(n, alpha)
    rng = np.random.default_rng(seed)
    out = np.empty(n, dtype=np.int64)
    todo = np.arange(n)
    while todo.size:
        u = 1.0 - rng.random(todo.size)
        draw = np.floor(u ** (-1.0 / alpha))
        ok = draw <= d_max
        out[todo[ok]] = draw[ok].astype(np.int64)
        todo = todo[~ok]
    return DegreeSequence(out, float(alpha), d_max)


def _truncation_factor(power: float, log_n: float, alpha: float) -> float:
    """(1 - n**(-power/alpha)) / power, continuous through power = 0."""
    z = -power / alpha * log_n
    if abs(power) < 1e-9:
        return log_n / alpha
    return -math.expm1(z) / power


def degree_moments(alpha: float, n: float) -> DegreeMoments:
    """Mean and variance of the continuous truncated Pareto with cutoff ``n**(1/alpha)``.

    Density ``C x**-(alpha+1)`` on ``[1, n**(1/alpha)]`` with ``C = alpha / (1 - 1/n)``.
    ``n = inf`` gives the untruncated law. Near ``alpha = 2`` the second moment
    uses the logarithmic limit.
    """
    _check_alpha(alpha)
    if n <= 1:
        raise NetworkError("n must exceed 1")
    if math.isinf(n):
        psi1 = 1.0
        mean = alpha / (alpha - 1.0)
        if alpha <= 2.0:
            return DegreeMoments(mean, math.inf, psi1, math.inf, math.inf)
        m2 = alpha / (alpha - 2.0)
        return DegreeMoments(mean, m2 - mean * mean, psi1, 1.0, m2)
    log_n = math.log(n)
    norm = -math.expm1(-log_n)  # 1 - 1/n
    # E[d^k] = alpha * (1 - n**((k - alpha)/alpha)) / ((alpha - k) * (1 - 1/n))
    m1 = alpha * _truncation_factor(alpha - 1.0, log_n, alpha) / norm
    m2 = alpha * _truncation_factor(alpha - 2.0, log_n, alpha) / norm
    psi1 = m1 * (alpha - 1.0) / alpha
    psi2 = m2 * (alpha - 2.0) / alpha if abs(alpha - 2.0) >= 1e-9 else math.nan
    return DegreeMoments(m1, m2 - m1 * m1, psi1, psi2, m2)


def consumption_weights(n: int, mode: str = "uniform", degrees=None) -> np.ndarray:
    """Positive household weights summing to one."""
    if mode == "uniform":
        return np.full(n, 1.0 / n)
    if mode == "degree-proportional":
        if degrees is None:
            raise NetworkError("degree-proportional weights need degrees")
        d = np.asarray(getattr(degrees, "degrees", degrees), dtype=np.float64)
        if d.shape != (n,) or d.min() <= 0:
            raise NetworkError("degrees must be positive, one per firm")
        return d / d.sum()
    raise NetworkError(f"unknown gamma mode {mode!r}; choose from {GAMMA_MODES}")


def _pick_uniform(rng, n, i, k):
    picks = rng.choice(n - 1, size=k, replace=False)
    return picks + (picks >= i)


def _pick_weighted(rng, cdf, n, i, k):
    # successive draws proportional to weight, skipping the buyer and repeats
    chosen: list[int] = []
    seen = {i}
    while len(chosen) < k:
        cand = np.searchsorted(cdf, rng.random(2 * (k - len(chosen)) + 4) * cdf[-1], side="right")
        for c in cand.tolist():
            c = min(c, n - 1)
            if c not in seen:
                seen.add(c)
                chosen.append(c)
                if len(chosen) == k:
                    break
    return np.asarray(chosen, dtype=np.int64)


def build_share_matrix(
    degrees: DegreeSequence,
    beta: float,
    alignment: str = "uniform",
    seed=None,
    gamma_mode: str = "uniform",
) -> ProductionNetwork:
    """Give firm ``i`` exactly ``d_i`` distinct suppliers, each with share ``(1-beta)/d_i``.

    ``alignment="degree-proportional"`` picks suppliers with probability
    proportional to their own degree, which lines up in- and out-degrees.
    """
    if not 0.0 < beta < 1.0:
        raise NetworkError("beta must lie in (0, 1)")
    if alignment not in ALIGNMENTS:
        raise NetworkError(f"unknown alignment {alignment!r}; choose from {ALIGNMENTS}")
    d = degrees.degrees
    n = d.size
    if d.max() >= n:
        bad = int(np.argmax(d >= n))
        raise NetworkError(f"firm {bad} needs {d[bad]} distinct suppliers but only {n - 1} exist")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(d.astype(np.float64)) if alignment == "degree-proportional" else None
    rows, cols, vals = [], [], []
    for i in range(n):
        k = int(d[i])
        sup = _pick_uniform(rng, n, i, k) if cdf is None else _pick_weighted(rng, cdf, n, i, k)
        rows.append(sup)
        cols.append(np.full(k, i))
        vals.append(np.full(k, (1.0 - beta) / k))
    A = sp.csr_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    gamma = consumption_weights(n, gamma_mode, d)
    meta = {"alpha": degrees.alpha, "seed": seed, "gamma_mode": gamma_mode, "alignment": alignment}
    return ProductionNetwork(A, float(beta), gamma, degrees, meta)


def random_network(n: int, alpha: float, beta: float, seed, alignment="uniform", gamma_mode="uniform"):
    """Degrees and suppliers from one seed (two independent child streams)."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    ss_deg, ss_links = root.spawn(2)
    deg = sample_degrees(n, alpha, ss_deg)
    net = build_share_matrix(deg, beta, alignment, ss_links, gamma_mode)
    net.meta["seed"] = seed if not isinstance(seed, np.random.SeedSequence) else list(np.atleast_1d(seed.entropy))
    return net


def write_network(net: ProductionNetwork, path, extra: dict | None = None) -> Path:
    """Write ``supplier,buyer,weight`` rows plus a JSON sidecar next to ``path``."""
    path = Path(path)
    coo = net.A.tocoo()
    order = np.lexsort((coo.row, coo.col))
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["supplier", "buyer", "weight"])
        for j, i, a in zip(coo.row[order], coo.col[order], coo.data[order]):
            w.writerow([int(j), int(i), repr(float(a))])
    side = {
        "n": net.n,
        "beta": net.beta,
        "gamma_mode": net.meta.get("gamma_mode", "uniform"),
        "alpha": net.meta.get("alpha", net.degrees.alpha if net.degrees else None),
        "seed": net.meta.get("seed"),
    }
    if side["gamma_mode"] not in GAMMA_MODES:
        side["gamma"] = [repr(float(g)) for g in net.gamma]
    side.update(extra or {})
    sidecar_path(path).write_text(json.dumps(side, indent=2, default=str), encoding="utf-8")
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".json")


def ingest_network(path, beta: float | None = None, normalize: bool = False, gamma_mode: str | None = None) -> ProductionNetwork:
    """Read an edge list; ``beta`` and ``gamma_mode`` default to the sidecar when present."""
    path = Path(path)
    side = {}
    if sidecar_path(path).exists():
        side = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    beta = side.get("beta") if beta is None else beta
    if beta is None:
        raise NetworkError("beta not given and no sidecar found")
    beta = float(beta)
    sup, buy, wts = [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["supplier", "buyer", "weight"]:
            raise NetworkError(f"{path}: expected header supplier,buyer,weight, got {header}")
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                j, i, a = int(row[0]), int(row[1]), float(row[2])
            except (ValueError, IndexError) as exc:
                raise NetworkError(f"{path}: row {rowno}: cannot parse {row}") from exc
            if j == i:
                raise NetworkError(f"{path}: row {rowno}: self-loop at firm {i}")
            if a < 0 or j < 0 or i < 0:
                raise NetworkError(f"{path}: row {rowno}: negative id or weight")
            sup.append(j)
            buy.append(i)
            wts.append(a)
    n = int(side.get("n", 0)) or (max(max(sup, default=-1), max(buy, default=-1)) + 1)
    if sup and max(max(sup), max(buy)) >= n:
        raise NetworkError(f"{path}: ids exceed n = {n}")
    A = sp.csr_array((np.asarray(wts, float), (np.asarray(sup, int), np.asarray(buy, int))), shape=(n, n))
    if normalize:
        colsum = np.asarray(A.sum(axis=0)).ravel()
        zero = np.flatnonzero(colsum <= 0)
        if zero.size:
            raise NetworkError(f"{path}: firm {zero[0]} buys nothing; its column cannot be normalized")
        A = sp.csr_array(A @ sp.diags_array((1.0 - beta) / colsum))
    in_deg = np.diff(A.tocsc().indptr)
    mode = gamma_mode or side.get("gamma_mode", "uniform")
    if "gamma" in side and gamma_mode is None:
        gamma = np.array([float(g) for g in side["gamma"]])
    else:
        gamma = consumption_weights(n, mode, in_deg if mode == "degree-proportional" else None)
    meta = {"alpha": side.get("alpha"), "seed": side.get("seed"), "gamma_mode": mode, "source": str(path)}
    return ProductionNetwork(A, beta, gamma, None, meta)
