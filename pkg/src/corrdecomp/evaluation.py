"""Event-level scoring and wall-clock benchmarking."""

from __future__ import annotations

import os
import statistics
import time
from contextlib import contextmanager
from dataclasses import dataclass

from threadpoolctl import threadpool_limits

from .signals import GroundTruth

__all__ = [
    "MatchCounts",
    "BenchRecord",
    "match_events",
    "prf",
    "benchmark",
    "pinned_workers",
]


@dataclass(frozen=True)
class MatchCounts:
    true_pos: int
    false_pos: int
    false_neg: int

    def __post_init__(self):
        if min(self.true_pos, self.false_pos, self.false_neg) < 0:
            raise ValueError("match counts must be non-negative")


@dataclass(frozen=True)
class BenchRecord:
    method_name: str
    trace_len: int
    wall_ms: float
    workers: int
    converged: bool = True
    repetitions: int = 0


def _intervals(items, rate_hz: float) -> list[tuple[float, float]]:
    """Normalize detections or truth to (onset_sample, length_samples) floats.

    Accepts snippets, a GroundTruth, (onset, length) sample pairs or
    objects with ``onset_s``/``duration_s``.
    """
    if isinstance(items, GroundTruth):
        items = items.events
    out = []
    for it in items:
        if hasattr(it, "start_sample"):
            out.append((float(it.start_sample), float(it.length)))
        elif hasattr(it, "onset_s"):
            out.append((it.onset_s * rate_hz, it.duration_s * rate_hz))
        else:
            a, n = it
            out.append((float(a), float(n)))
    return sorted(out)


def match_events(detected, truth, tol_s: float = 0.5, rate_hz: float = 200.0) -> MatchCounts:
    """Greedy one-to-one matching in onset order.

    A detection matches a still-unmatched truth event when their sample
    intervals overlap or their onsets differ by at most ``tol_s`` seconds.
    """
    if tol_s < 0:
        raise ValueError("tol_s must be >= 0")
    det = _intervals(detected, rate_hz)
    tru = _intervals(truth, rate_hz)
    tol = tol_s * rate_hz
    used = [False] * len(tru)
    tp = 0
    for a, n in det:
        for k, (b, m) in enumerate(tru):
            if used[k]:
                continue
            overlap = a < b + m and b < a + n
            if overlap or abs(a - b) <= tol:
                used[k] = True
                tp += 1
                break
    return MatchCounts(tp, len(det) - tp, len(tru) - tp)


def prf(counts: MatchCounts) -> tuple[float, float, float]:
    tp, fp, fn = counts.true_pos, counts.false_pos, counts.false_neg
    if tp + fp + fn == 0:
        raise ValueError("precision/recall undefined for all-zero counts")
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


@contextmanager
def pinned_workers(workers: int):
    """Limit BLAS/OpenMP thread pools to ``workers`` for the duration."""
    old = {k: os.environ.get(k) for k in _THREAD_VARS}
    for k in _THREAD_VARS:
        os.environ[k] = str(workers)
    try:
        with threadpool_limits(limits=workers):
            yield
    finally:
        for k, v in old.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v


def benchmark(method: str, runnable, repetitions: int = 5, workers: int = 1,
              trace_len: int = 0) -> BenchRecord:
    """Median wall time of ``runnable()`` after one untimed warm-up call.

    If ``runnable`` returns an object with a ``converged`` attribute (or a
    tuple whose last element is a bool) it is recorded.
    """
    if repetitions < 3:
        raise ValueError("benchmark needs at least 3 repetitions")
    times = []
    converged = True
    with pinned_workers(workers):
        runnable()
        for _ in range(repetitions):
            t0 = time.perf_counter()
            out = runnable()
            times.append((time.perf_counter() - t0) * 1e3)
            converged = bool(getattr(out, "converged", converged))
    wall = statistics.median(times)
    # a no-op can time at zero on coarse clocks
    wall = max(wall, 1e-6)
    return BenchRecord(method, int(trace_len), float(wall), int(workers), converged, repetitions)
