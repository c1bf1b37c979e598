"""Comparison methods: the l2-norm embedding transform and RPCA by inexact ALM.

Both feed their event columns through the same snippet/threshold path
as the correntropy decomposition so thresholds compare like for like.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correntropy import WindowMatrix, windowize
from .decomposition import (
    NoEventsError,
    find_snippets,
    percentile,
    sample_skewness,
    threshold_gamma,
)
from .signals import Trace

__all__ = [
    "RpcaConfig",
    "RpcaResult",
    "EmbeddingResult",
    "embedding_transform",
    "soft_threshold",
    "singular_value_threshold",
    "rpca_ialm",
    "rpca_event_columns",
    "rpca_threshold",
]


@dataclass(frozen=True)
class EmbeddingResult:
    norms: np.ndarray
    gamma: float
    rho_star: int
    s_indices: np.ndarray


def embedding_transform(trace: Trace | np.ndarray, w: int, r: int = 99) -> EmbeddingResult:
    """Window l2 norms split at the percentile that least skews the lower mass.

    Background norms pile up in the main lobe; event windows sit in the
    upper tail, ``I_S = {norms > percentile(norms, rho*)}``.
    """
    xm = windowize(trace, w)
    norms = np.linalg.norm(xm.data, axis=0)
    if np.ptp(norms) == 0:
        raise ValueError("all window norms are equal; embedding transform is degenerate")
    grid = np.arange(1, r + 1)
    skew = np.full(grid.size, np.nan)
    for k, rho in enumerate(grid):
        t = percentile(norms, rho)
        lower = norms[norms <= t]
        if lower.size >= 3 and np.ptp(lower) > 0:
            skew[k] = sample_skewness(lower)
    if np.all(np.isnan(skew)):
        # too few distinct norms for any skewness; fall back to strict max
        rho_star = int(grid[-1])
    else:
        rho_star = int(grid[np.nanargmin(np.abs(skew))])
    t = percentile(norms, rho_star)
    s_idx = np.flatnonzero(norms > t)
    if s_idx.size == 0:
        raise NoEventsError("no window norm exceeds the split value")
    return EmbeddingResult(norms, float(norms[s_idx].min()), rho_star, s_idx)


def soft_threshold(m, tau: float) -> np.ndarray:
    if tau < 0:
        raise ValueError("tau must be >= 0")
    m = np.asarray(m, dtype=float)
    return np.sign(m) * np.maximum(np.abs(m) - tau, 0.0)


def singular_value_threshold(m, tau: float) -> np.ndarray:
    """Shrink the singular values of ``m`` by ``tau``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("singular value thresholding needs a finite matrix")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"SVD failed: {exc}") from exc
    s = np.maximum(s - tau, 0.0)
    k = int(np.count_nonzero(s))
    return (u[:, :k] * s[:k]) @ vt[:k]


@dataclass(frozen=True)
class RpcaConfig:
    """Inexact ALM settings; ``lam``/``mu0`` of None are derived from the data.

    ``lam`` defaults to ``1/sqrt(max(m, n))`` and ``mu0`` to ``1.25/||X||_2``.
    """

    lam: float | None = None
    mu0: float | None = None
    mu_growth: float = 1.5
    tol: float = 1e-7
    max_iter: int = 1000
    flag_ratio: float = 0.5

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise ValueError("lam must be > 0")
        if self.mu0 is not None and not self.mu0 > 0:
            raise ValueError("mu0 must be > 0")
        if not self.mu_growth > 1:
            raise ValueError("mu_growth must be > 1")
        if not self.tol > 0 or self.max_iter < 1:
            raise ValueError("tol and max_iter must be positive")


@dataclass
class RpcaResult:
    l_matrix: np.ndarray
    s_matrix: np.ndarray
    iterations: int
    residual: float
    converged: bool
    residual_history: list = field(default_factory=list)


def rpca_ialm(x, cfg: RpcaConfig | None = None) -> RpcaResult:
    """Low-rank plus sparse split of ``x`` (Lin, Chen & Ma inexact ALM).

    Alternates singular value thresholding for ``L``, soft thresholding for
    ``S``, a dual ascent step on ``Y`` and a geometric increase of ``mu``.
    Stops when ``||X - L - S||_F / ||X||_F <= tol``. If ``max_iter`` is hit
    the iterate with the smallest residual is returned with
    ``converged=False``.
    """
    cfg = cfg or RpcaConfig()
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or min(x.shape) < 2:
        raise ValueError(f"RPCA needs a matrix of at least 2x2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("RPCA needs a finite matrix")
    lam = cfg.lam if cfg.lam is not None else 1.0 / np.sqrt(max(x.shape))
    norm_fro = np.linalg.norm(x)
    if norm_fro == 0:
        z = np.zeros_like(x)
        return RpcaResult(z, z.copy(), 0, 0.0, True, [])
    norm_two = np.linalg.norm(x, 2)
    mu = cfg.mu0 if cfg.mu0 is not None else 1.25 / norm_two
    y = x / max(norm_two, np.abs(x).max() / lam)
    s = np.zeros_like(x)
    l = np.zeros_like(x)

    history = []
    best = None
    for it in range(1, cfg.max_iter + 1):
        l = singular_value_threshold(x - s + y / mu, 1.0 / mu)
        s = soft_threshold(x - l + y / mu, lam / mu)
        resid = x - l - s
        y = y + mu * resid
        mu *= cfg.mu_growth
        err = float(np.linalg.norm(resid) / norm_fro)
        history.append(err)
        if best is None or err < best[0]:
            best = (err, l, s, it)
        if err <= cfg.tol:
            return RpcaResult(l, s, it, err, True, history)
    err, l, s, it = best
    return RpcaResult(l, s, cfg.max_iter, err, False, history)


def rpca_event_columns(xm: WindowMatrix, result: RpcaResult, ratio: float = 0.5) -> np.ndarray:
    """Columns where the sparse part carries more than ``ratio`` of the column norm."""
    xn = np.linalg.norm(xm.data, axis=0)
    sn = np.linalg.norm(result.s_matrix, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(xn > 0, sn / xn, 0.0)
    return np.flatnonzero(frac > ratio)


def rpca_threshold(trace: Trace | np.ndarray, w: int, m: int = 150,
                   cfg: RpcaConfig | None = None) -> tuple[float, RpcaResult, list]:
    """Threshold from RPCA event columns; returns ``(gamma, rpca_result, snippets)``."""
    cfg = cfg or RpcaConfig()
    xm = windowize(trace, w)
    res = rpca_ialm(xm.data, cfg)
    cols = rpca_event_columns(xm, res, cfg.flag_ratio)
    if cols.size == 0:
        raise NoEventsError("RPCA flagged no event columns")
    snippets = find_snippets(trace, cols, w, m)
    return threshold_gamma(snippets), res, snippets
