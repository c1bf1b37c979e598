"""Correntropy decomposition of band-passed time series into background and sparse events."""

from .correntropy import (
    CorrentropyMatrix,
    KernelConfig,
    SimilarityVector,
    WindowMatrix,
    correntropy_matrix,
    gaussian_kernel,
    kernel_config,
    silverman_bandwidth,
    similarity_vector,
    windowize,
)
from .decomposition import (
    DecompositionResult,
    NoEventsError,
    Snippet,
    WSweep,
    decompose,
    detect,
    find_snippets,
    sweep_w,
    threshold_gamma,
)
from .signals import GroundTruth, SynthConfig, Trace, bandpass_fir, synth_trace, zscore_normalize

__version__ = "0.1.0"

__all__ = [
    "CorrentropyMatrix",
    "KernelConfig",
    "SimilarityVector",
    "WindowMatrix",
    "correntropy_matrix",
    "gaussian_kernel",
    "kernel_config",
    "silverman_bandwidth",
    "similarity_vector",
    "windowize",
    "DecompositionResult",
    "NoEventsError",
    "Snippet",
    "WSweep",
    "decompose",
    "detect",
    "find_snippets",
    "sweep_w",
    "threshold_gamma",
    "GroundTruth",
    "SynthConfig",
    "Trace",
    "bandpass_fir",
    "synth_trace",
    "zscore_normalize",
]
