"""Gaussian-kernel correntropy between non-overlapping windows of a trace."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from numba import types
from numba.extending import intrinsic

from .signals import Trace

__all__ = [
    "KernelConfig",
    "WindowMatrix",
    "CorrentropyMatrix",
    "SimilarityVector",
    "gaussian_kernel",
    "silverman_bandwidth",
    "kernel_config",
    "correntropy_estimate",
    "windowize",
    "correntropy_matrix",
    "similarity_vector",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelConfig:
    sigma: float
    sigma_star: float
    shrink_factor: float = 1.5

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma}")
        if not self.sigma_star > 0 or not self.shrink_factor > 0:
            raise ValueError("sigma_star and shrink_factor must be > 0")


@dataclass(frozen=True)
class WindowMatrix:
    """Trace segments as columns: ``data[:, j]`` is samples ``[j*w, (j+1)*w)``."""

    data: np.ndarray
    w: int
    n_cols: int
    dropped_tail: int

    def __post_init__(self):
        if self.data.shape != (self.w, self.n_cols):
            raise ValueError(f"data shape {self.data.shape} != ({self.w}, {self.n_cols})")
        if self.n_cols < 2:
            raise ValueError("a window matrix needs at least 2 columns")

    @classmethod
    def from_array(cls, data) -> "WindowMatrix":
        data = np.asarray(data, dtype=float)
        if data.ndim != 2:
            raise ValueError("window matrix data must be 2-D")
        return cls(data, data.shape[0], data.shape[1], 0)

    def column_span(self, j: int) -> tuple[int, int]:
        return j * self.w, (j + 1) * self.w


@dataclass(frozen=True)
class CorrentropyMatrix:
    values: np.ndarray
    sigma: float

    @property
    def n_cols(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SimilarityVector:
    z: np.ndarray

    def __len__(self):
        return self.z.size


def gaussian_kernel(u, sigma: float):
    """Normalized Gaussian density with standard deviation ``sigma``, evaluated at ``u``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    u = np.asarray(u, dtype=float)
    out = (_INV_SQRT_2PI / sigma) * np.exp(-(u * u) / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


def silverman_bandwidth(trace: Trace | np.ndarray) -> float:
    """Rule-of-thumb bandwidth ``1.06 * s * N**(-1/5)`` with the sample std ``s``."""
    x = trace.samples if isinstance(trace, Trace) else np.asarray(trace, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("Silverman's rule needs at least 2 samples")
    s = x.std(ddof=1)
    if not s > 0:
        raise ValueError("Silverman's rule is undefined for a constant trace")
    return 1.06 * s * n ** (-0.2)


def kernel_config(trace: Trace, shrink_factor: float = 1.5) -> KernelConfig:
    star = silverman_bandwidth(trace)
    return KernelConfig(sigma=star / shrink_factor, sigma_star=star, shrink_factor=shrink_factor)


def correntropy_estimate(x, y, sigma: float) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise ValueError(f"x and y must be nonempty 1-D of equal length, got {x.shape} and {y.shape}")
    return float(np.mean(gaussian_kernel(x - y, sigma)))


def windowize(trace: Trace | np.ndarray, w: int) -> WindowMatrix:
    x = trace.samples if isinstance(trace, Trace) else np.asarray(trace, dtype=float)
    w = int(w)
    if w < 2:
        raise ValueError(f"window length must be >= 2, got {w}")
    n_cols = x.size // w
    if n_cols < 2:
        raise ValueError(f"trace of {x.size} samples gives fewer than 2 windows of length {w}")
    used = n_cols * w
    # column-major reshape keeps each column a contiguous slice
    data = x[:used].reshape(n_cols, w).T.copy()
    return WindowMatrix(data, w, n_cols, x.size - used)


# Inline 2**t for t in [-1000, 0] so the pair loop vectorizes (libm exp
# does not under numba and was ~6x slower). The data are prescaled so the
# squared difference is already the base-2 exponent; t is split exactly
# into an integer k and r in [-1/2, 1/2], 2**r comes from a degree-10
# near-minimax polynomial (relative error < 5e-16) and 2**k is assembled
# directly in the exponent bits.
_LOG2E = 1.4426950408889634
_EXP2_FLOOR = -1000.0
_Q0, _Q1, _Q2, _Q3, _Q4, _Q5 = (
    1.0, 0.69314718055995, 0.24022650695910097, 0.05550410866444772,
    0.009618129107606888, 0.0013333558230164974,
)
_Q6, _Q7, _Q8, _Q9, _Q10 = (
    0.0001540353044173605, 1.5252657260200837e-05, 1.321544258792169e-06,
    1.0208690299958306e-07, 7.072585949269223e-09,
)


@intrinsic
def _bits_to_float(typingctx, x):
    sig = types.float64(types.int64)

    def codegen(context, builder, signature, args):
        return builder.bitcast(args[0], context.get_value_type(types.float64))

    return sig, codegen


@numba.njit(fastmath=True, cache=True, nogil=True)
def _fill_rows(xs, scale, out, first, step):
    """Rows ``first, first+step, ...`` of C from the diagonal rightward, mirrored.

    ``xs`` holds the windows as rows, prescaled so that
    ``exp(-(a-b)**2 / (2 sigma**2)) == 2**-(a'-b')**2``.
    """
    n, w = xs.shape
    for j in range(first, n, step):
        out[j, j] = scale
        for k in range(j + 1, n):
            acc = 0.0
            for i in range(w):
                d = xs[j, i] - xs[k, i]
                t = -(d * d)
                t = t if t > _EXP2_FLOOR else _EXP2_FLOOR
                kf = math.floor(t + 0.5)
                r = t - kf  # exact
                p = _Q0 + r * (_Q1 + r * (_Q2 + r * (_Q3 + r * (_Q4 + r * (
                    _Q5 + r * (_Q6 + r * (_Q7 + r * (_Q8 + r * (_Q9 + r * _Q10)))))))))
                acc += p * _bits_to_float((np.int64(kf) + 1023) << 52)
            v = acc / w * scale
            out[j, k] = v
            out[k, j] = v


def correntropy_matrix(xm: WindowMatrix, sigma: float, workers: int = 1) -> CorrentropyMatrix:
    """Pairwise window correntropy.

    Each pair is evaluated once and mirrored. Rows are independent, so any
    split across ``workers`` threads gives bitwise identical output.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    xs = np.asarray(xm.data, dtype=float).T * math.sqrt(_LOG2E / (2.0 * sigma * sigma))
    xs = np.ascontiguousarray(xs)
    n = xs.shape[0]
    out = np.empty((n, n))
    scale = _INV_SQRT_2PI / sigma
    if workers <= 1:
        _fill_rows(xs, scale, out, 0, 1)
    else:
        # interleaved rows give every worker a similar share of the triangle
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_fill_rows, xs, scale, out, k, workers)
                       for k in range(workers)]
            for f in futures:
                f.result()
    return CorrentropyMatrix(out, float(sigma))


def similarity_vector(c: CorrentropyMatrix) -> SimilarityVector:
    """Column sums of C, self term included."""
    return SimilarityVector(c.values.sum(axis=0))
