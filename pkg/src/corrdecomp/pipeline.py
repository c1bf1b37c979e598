"""Shared preprocessing and end-to-end runs used by the CLI, scripts and tests."""

from __future__ import annotations

from dataclasses import replace

from .correntropy import kernel_config, windowize
from .decomposition import DecompositionResult, decompose, find_snippets, threshold_gamma
from .signals import GroundTruth, SynthConfig, Trace, bandpass_fir, resample_linear, synth_trace, zscore_normalize

PROCESSING_RATE_HZ = 200.0
DEFAULT_BAND = (11.0, 16.0)


def prepare(trace: Trace, band: tuple[float, float] = DEFAULT_BAND,
            rate_hz: float = PROCESSING_RATE_HZ) -> Trace:
    """Resample to ``rate_hz`` when needed, band-pass, then z-score."""
    if trace.rate_hz != rate_hz:
        trace = resample_linear(trace, rate_hz)
    if band[1] >= trace.rate_hz / 2:
        raise ValueError(f"band upper edge {band[1]} Hz is not below Nyquist ({trace.rate_hz / 2} Hz)")
    return zscore_normalize(bandpass_fir(trace, *band))


def synthetic_case(seed: int, band: tuple[float, float] | None = DEFAULT_BAND,
                   **overrides) -> tuple[Trace, GroundTruth]:
    """Synthetic trace for ``seed`` with ``SynthConfig`` overrides.

    With ``band=None`` the trace is only z-scored, which is how the
    generator's own output is fed to the decomposition.
    """
    cfg = replace(SynthConfig(seed=seed), **overrides)
    trace, truth = synth_trace(cfg)
    trace = zscore_normalize(trace) if band is None else prepare(trace, band)
    return trace, truth


def correntropy_threshold(trace: Trace, w: int, m: int = 150, r: int = 99,
                          shrink_factor: float = 1.5, workers: int = 1) -> DecompositionResult:
    """Window matrix to threshold; raises ``NoEventsError`` when no snippet is found."""
    kc = kernel_config(trace, shrink_factor)
    xm = windowize(trace, w)
    res = decompose(xm, kc.sigma, r=r, workers=workers)
    res.snippets = find_snippets(trace, res.s_indices, w, m)
    res.gamma = threshold_gamma(res.snippets)
    return res
