"""Skewness-guided split of windows into background and events."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .correntropy import (
    SimilarityVector,
    WindowMatrix,
    correntropy_matrix,
    kernel_config,
    similarity_vector,
    windowize,
)
from .signals import Trace

__all__ = [
    "NoEventsError",
    "PercentileSweep",
    "Snippet",
    "DecompositionResult",
    "sample_skewness",
    "percentile",
    "split_by_percentile",
    "decompose",
    "find_snippets",
    "threshold_gamma",
    "detect",
    "sweep_w",
    "SweepPoint",
    "WSweep",
]


class NoEventsError(ValueError):
    """Raised when no event windows were found, so the threshold is undefined."""


@dataclass(frozen=True)
class PercentileSweep:
    rho_grid: np.ndarray
    skewness_by_rho: np.ndarray
    rho_star: int


@dataclass(frozen=True)
class Snippet:
    start_sample: int
    length: int
    samples: np.ndarray
    norm: float

    @classmethod
    def from_trace(cls, x: np.ndarray, start: int, length: int) -> "Snippet":
        seg = x[start:start + length].copy()
        return cls(int(start), int(length), seg, math.sqrt(seg @ seg))

    @property
    def stop_sample(self) -> int:
        return self.start_sample + self.length


@dataclass
class DecompositionResult:
    l_indices: np.ndarray
    s_indices: np.ndarray
    rho_star: int
    sigma_used: float
    w_used: int
    z: np.ndarray
    sweep: PercentileSweep
    gamma: float | None = None
    snippets: list = field(default_factory=list)
    n_cols: int = 0

    @property
    def tie_indices(self) -> np.ndarray:
        """Columns equal to the split value; counted as background."""
        used = np.zeros(self.n_cols, dtype=bool)
        used[self.l_indices] = True
        used[self.s_indices] = True
        return np.flatnonzero(~used)

    def reconstruct(self, xm: WindowMatrix, n_samples: int | None = None):
        """Write L and S columns back to their sample positions.

        Tie columns go to the background sequence. Returns ``(l, s)``.
        """
        n = xm.w * xm.n_cols if n_samples is None else n_samples
        l = np.zeros(n)
        s = np.zeros(n)
        is_event = np.zeros(xm.n_cols, dtype=bool)
        is_event[self.s_indices] = True
        for j in range(xm.n_cols):
            a, b = xm.column_span(j)
            (s if is_event[j] else l)[a:b] = xm.data[:, j]
        return l, s


def sample_skewness(values) -> float:
    """Biased moment skewness ``m3 / m2**1.5``."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 3:
        raise ValueError("skewness needs at least 3 values")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if not m2 > 0:
        raise ValueError("skewness is undefined for zero-variance data")
    m3 = np.mean(d * d * d)
    return float(m3 / m2**1.5)


def percentile(values, p: float) -> float:
    """Percentile with linear interpolation between closest ranks.

    On sorted ``v[1..n]`` the rank is ``h = 1 + (p/100)(n-1)``.
    """
    if not 0 <= p <= 100:
        raise ValueError(f"percentile must lie in [0, 100], got {p}")
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("percentile of an empty sequence")
    return _percentile_sorted(v, p)


def _percentile_sorted(v: np.ndarray, p: float) -> float:
    h = (p / 100.0) * (v.size - 1)  # zero-based rank
    lo = int(np.floor(h))
    hi = min(lo + 1, v.size - 1)
    return float(v[lo] + (h - lo) * (v[hi] - v[lo]))


def _as_z(z) -> np.ndarray:
    return np.asarray(z.z if isinstance(z, SimilarityVector) else z, dtype=float)


def split_by_percentile(z, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """``I_L = {z > t}``, ``I_S = {z < t}`` for ``t = percentile(z, rho)``; ties join neither."""
    z = _as_z(z)
    if not 1 <= rho <= 99:
        raise ValueError(f"rho must lie in [1, 99], got {rho}")
    t = percentile(z, rho)
    il = np.flatnonzero(z > t)
    if il.size == 0:
        raise ValueError(f"no column lies above the {rho}th percentile")
    return il, np.flatnonzero(z < t)


def _percentile_sweep(xm: WindowMatrix, z: np.ndarray, r: int) -> PercentileSweep:
    """Skewness of the flattened L for every rho in 1..r.

    Columns above the split are always a suffix of the ascending Z order,
    so per-column power sums accumulated from the top give every s_rho
    without re-reading the data.
    """
    grid = np.arange(1, r + 1)
    order = np.argsort(z, kind="stable")
    zs = z[order]
    n = zs.size
    x = xm.data - xm.data.mean()
    sums = np.stack([x.sum(axis=0), (x * x).sum(axis=0), (x * x * x).sum(axis=0)])
    top = np.cumsum(sums[:, order[::-1]], axis=1)  # top[:, c-1] = sums over the c largest Z
    # split values for every rho, interpolated exactly as in ``percentile``
    h = (grid / 100.0) * (n - 1)
    lo = np.floor(h).astype(int)
    hi = np.minimum(lo + 1, n - 1)
    t = zs[lo] + (h - lo) * (zs[hi] - zs[lo])
    count = n - np.searchsorted(zs, t, side="right")
    valid = (count > 0) & (count * xm.w >= 3)
    s1, s2, s3 = top[:, np.maximum(count, 1) - 1] / (np.maximum(count, 1) * xm.w)
    m2 = s2 - s1 * s1
    valid &= m2 > 0
    m3 = s3 - 3 * s1 * s2 + 2 * s1**3
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = np.where(valid, m3 / np.where(valid, m2, 1.0) ** 1.5, np.nan)
    if np.all(np.isnan(skew)):
        raise ValueError("every percentile split produced an empty or degenerate L")
    # nanargmin returns the first minimum, i.e. the smallest rho on ties
    rho_star = int(grid[np.nanargmin(np.abs(skew))])
    return PercentileSweep(grid, skew, rho_star)


def decompose(xm: WindowMatrix, sigma: float, r: int = 99, workers: int = 1) -> DecompositionResult:
    """Split window columns into background ``I_L`` and events ``I_S``.

    The split value is the percentile of the similarity vector that makes
    the flattened background samples least skewed.
    """
    if not 1 <= r <= 99:
        raise ValueError(f"r must lie in [1, 99], got {r}")
    z = similarity_vector(correntropy_matrix(xm, sigma, workers=workers)).z
    sweep = _percentile_sweep(xm, z, r)
    il, is_ = split_by_percentile(z, sweep.rho_star)
    return DecompositionResult(
        l_indices=il, s_indices=is_, rho_star=sweep.rho_star, sigma_used=float(sigma),
        w_used=xm.w, z=z, sweep=sweep, n_cols=xm.n_cols,
    )


def _runs(indices) -> list[tuple[int, int]]:
    idx = np.unique(np.asarray(indices, dtype=int))
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) != 1) + 1
    return [(int(g[0]), int(g[-1])) for g in np.split(idx, breaks)]


def find_snippets(trace: Trace | np.ndarray, s_indices, w: int, m: int) -> list[Snippet]:
    """One ``m``-sample snippet per run of consecutive event columns.

    Each run covers samples ``[first*w, (last+1)*w)``; the snippet sits
    where the ``m``-long sliding energy peaks inside that span. Spans
    shorter than ``m`` are centred on their largest squared sample and
    clamped to the trace.
    """
    if m < 1:
        raise ValueError(f"snippet length must be >= 1, got {m}")
    x = trace.samples if isinstance(trace, Trace) else np.asarray(trace, dtype=float)
    n = x.size
    m_eff = min(m, n)
    energy = x * x
    runs = _runs(s_indices)
    if not runs:
        return []
    # windowed energy at every admissible start, from one prefix sum
    c = np.concatenate(([0.0], np.cumsum(energy)))
    win = c[m_eff:] - c[:-m_eff]
    bounds = np.array(runs, dtype=np.int64)
    first_sample = bounds[:, 0] * w
    if np.any(first_sample >= n):
        bad = int(bounds[np.argmax(first_sample >= n), 0])
        raise ValueError(f"event column {bad} lies beyond the trace")
    stop_sample = np.minimum((bounds[:, 1] + 1) * w, n)
    starts = _peak_starts(win, energy, first_sample, stop_sample, m_eff)
    return [Snippet.from_trace(x, int(a), m_eff) for a in starts]


@numba.njit(cache=True, nogil=True)
def _peak_starts(win, energy, first, stop, m):
    n = energy.size
    out = np.empty(first.size, dtype=np.int64)
    for q in range(first.size):
        a, b = first[q], stop[q]
        if b - a >= m:
            out[q] = a + np.argmax(win[a:b - m + 1])
        else:
            peak = a + np.argmax(energy[a:b])
            out[q] = min(max(peak - m // 2, 0), n - m)
    return out


def threshold_gamma(snippets) -> float:
    if not snippets:
        raise NoEventsError("no snippets; threshold is undefined")
    return min(s.norm for s in snippets)


def detect(trace: Trace, w: int, m: int = 150, r: int = 99, shrink_factor: float = 1.5,
           workers: int = 1) -> DecompositionResult:
    """Run the full decomposition on an already band-passed, normalized trace.

    Raises :class:`NoEventsError` when no event columns are found; the
    result without a threshold is attached as ``err.result``.
    """
    kc = kernel_config(trace, shrink_factor)
    xm = windowize(trace, w)
    res = decompose(xm, kc.sigma, r=r, workers=workers)
    res.snippets = find_snippets(trace, res.s_indices, w, m)
    if not res.snippets:
        err = NoEventsError(f"no event windows at w={w}")
        err.result = res
        raise err
    res.gamma = threshold_gamma(res.snippets)
    return res


@dataclass(frozen=True)
class SweepPoint:
    w: int
    gamma: float | None
    rho_star: int | None = None
    n_events: int = 0


@dataclass(frozen=True)
class WSweep:
    points: tuple
    w_star: int

    @property
    def curve(self) -> list[tuple[int, float | None]]:
        return [(p.w, p.gamma) for p in self.points]


def sweep_w(trace: Trace, w_grid, m: int = 150, r: int = 99, shrink_factor: float = 1.5,
            workers: int = 1) -> WSweep:
    """Threshold as a function of window length; ``w_star`` maximizes it.

    Points where the threshold is undefined (no events, or too few
    windows) are kept with ``gamma=None``. Ties go to the smallest w.
    """
    points = []
    for w in w_grid:
        try:
            res = detect(trace, int(w), m=m, r=r, shrink_factor=shrink_factor, workers=workers)
        except NoEventsError as exc:
            res = getattr(exc, "result", None)
            points.append(SweepPoint(int(w), None, res.rho_star if res else None, 0))
            continue
        except ValueError:
            points.append(SweepPoint(int(w), None))
            continue
        points.append(SweepPoint(int(w), res.gamma, res.rho_star, len(res.snippets)))
    defined = [p for p in points if p.gamma is not None]
    if not defined:
        raise NoEventsError("threshold undefined for every window length in the grid")
    best = max(defined, key=lambda p: p.gamma)
    return WSweep(tuple(points), best.w)
