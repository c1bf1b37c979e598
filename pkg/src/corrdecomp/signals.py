"""Signal conditioning and synthetic two-component traces.

A synthetic trace is a 1/f Gaussian background plus a handful of
Hann-windowed sinusoidal bursts, which is the smallest model that has
both a dense structured part and sparse transient events.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

__all__ = [
    "Trace",
    "SynthConfig",
    "GroundTruth",
    "bandpass_fir",
    "zscore_normalize",
    "resample_linear",
    "synth_trace",
    "synth_background",
]


@dataclass(frozen=True)
class Trace:
    """A sampled single-channel signal."""

    samples: np.ndarray
    rate_hz: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("trace samples must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(x)):
            raise ValueError("trace samples contain NaN or Inf")
        rate = float(self.rate_hz)
        if not np.isfinite(rate) or rate <= 0:
            raise ValueError(f"rate_hz must be finite and positive, got {self.rate_hz!r}")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "rate_hz", rate)

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.rate_hz

    def with_samples(self, samples) -> "Trace":
        return Trace(samples, self.rate_hz)


@dataclass(frozen=True)
class GroundTruth:
    """Event list as (onset_sample, length_samples) pairs, sorted and disjoint."""

    events: tuple = ()

    def __post_init__(self):
        ev = tuple((int(a), int(b)) for a, b in self.events)
        ev = tuple(sorted(ev))
        for (a0, l0), (a1, _) in zip(ev, ev[1:]):
            if a0 + l0 > a1:
                raise ValueError(f"ground-truth events overlap at sample {a1}")
        object.__setattr__(self, "events", ev)

    def __len__(self):
        return len(self.events)

    def intervals_s(self, rate_hz: float) -> list[tuple[float, float]]:
        return [(a / rate_hz, n / rate_hz) for a, n in self.events]


@dataclass
class SynthConfig:
    duration_s: float = 600.0
    rate_hz: float = 200.0
    n_events: int = 20
    event_freq_hz: float = 13.0
    event_dur_samples: int = 150
    event_amplitude: float = 4.0
    noise_exponent: float = 1.0
    seed: int = 0

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.rate_hz))

    def validate(self):
        if self.rate_hz <= 0 or self.duration_s <= 0:
            raise ValueError("duration_s and rate_hz must be positive")
        if self.n_events < 0:
            raise ValueError("n_events must be >= 0")
        if self.event_dur_samples < 1:
            raise ValueError("event_dur_samples must be >= 1")
        if self.n_samples < self.event_dur_samples * self.n_events:
            raise ValueError(
                f"cannot place {self.n_events} disjoint events of "
                f"{self.event_dur_samples} samples in {self.n_samples} samples"
            )


def bandpass_fir(trace: Trace, low_hz: float, high_hz: float, n_taps: int = 401) -> Trace:
    """Zero-phase windowed-sinc (Hamming) bandpass.

    The linear-phase FIR is applied forward and backward, so the effective
    magnitude response is squared and the phase is zero.
    """
    nyq = trace.rate_hz / 2
    if not 0 < low_hz < high_hz < nyq:
        raise ValueError(
            f"band edges must satisfy 0 < low < high < {nyq:g} Hz, got ({low_hz}, {high_hz})"
        )
    if n_taps < 11 or n_taps % 2 == 0:
        raise ValueError(f"n_taps must be odd and >= 11, got {n_taps}")
    taps = sps.firwin(n_taps, [low_hz, high_hz], pass_zero=False, window="hamming", fs=trace.rate_hz)
    x = trace.samples
    padlen = min(3 * n_taps, x.size - 1)
    y = sps.filtfilt(taps, [1.0], x, padlen=padlen)
    return trace.with_samples(y)


def zscore_normalize(trace: Trace) -> Trace:
    """Zero mean, unit population standard deviation."""
    x = trace.samples
    sd = x.std()
    if not sd > 0:
        raise ValueError("cannot normalize a constant trace (zero variance)")
    y = (x - x.mean()) / sd
    # second pass removes the O(eps * N) drift left by the first
    y = (y - y.mean()) / y.std()
    return trace.with_samples(y)


def resample_linear(trace: Trace, target_hz: float) -> Trace:
    """Linear-interpolation resampling over the original time span.

    The output keeps the first and last source instants, so its length is
    ``round((N - 1) * target / rate) + 1``; ``[0, 1]`` at 1 Hz becomes
    ``[0, 0.5, 1]`` at 2 Hz.
    """
    if not target_hz > 0:
        raise ValueError("target_hz must be positive")
    if target_hz == trace.rate_hz:
        return Trace(trace.samples.copy(), trace.rate_hz)
    n_in = trace.samples.size
    n_out = int(round((n_in - 1) * target_hz / trace.rate_hz)) + 1
    t_out = np.minimum(np.arange(n_out) * (trace.rate_hz / target_hz), n_in - 1)
    y = np.interp(t_out, np.arange(n_in), trace.samples)
    return Trace(y, target_hz)


def synth_background(n: int, exponent: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian noise with power spectrum proportional to 1/f**exponent, unit RMS."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n)
    scale = np.zeros_like(f)
    scale[1:] = f[1:] ** (-exponent / 2)
    y = np.fft.irfft(spec * scale, n)
    return y / np.sqrt(np.mean(y**2))


def synth_trace(cfg: SynthConfig) -> tuple[Trace, GroundTruth]:
    """Background plus ``n_events`` non-overlapping Hann-windowed sinusoids.

    Onsets are uniform over all non-overlapping placements: sorted slack
    offsets drawn from ``[0, N - n * L]`` are shifted by ``i * L``.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_samples
    x = synth_background(n, cfg.noise_exponent, rng)
    rms = np.sqrt(np.mean(x**2))

    length = cfg.event_dur_samples
    slack = n - length * cfg.n_events
    offsets = np.sort(rng.integers(0, slack + 1, size=cfg.n_events))
    onsets = offsets + length * np.arange(cfg.n_events)
    phases = rng.uniform(0, 2 * np.pi, size=cfg.n_events)

    envelope = np.hanning(length)
    t = np.arange(length) / cfg.rate_hz
    for onset, phase in zip(onsets, phases):
        burst = np.sin(2 * np.pi * cfg.event_freq_hz * t + phase)
        x[onset:onset + length] += cfg.event_amplitude * rms * envelope * burst

    truth = GroundTruth(tuple((int(a), length) for a in onsets))
    return Trace(x, cfg.rate_hz), truth
