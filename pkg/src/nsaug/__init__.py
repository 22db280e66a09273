"""Surrogate-based augmentation of nonstationary EEG/ECG time series."""

from .changepoint import ChangepointConfig, ChangepointSet, detect_changepoints
from .core import Signal
from .iaaft import (IaaftConfig, SurrogateSet, iaaft, iaaft_fixed_edges, iaaft_fixed_points,
                    smooth_preserving_peaks)
from .metrics import SpectralReport, compare
from .peaks import FixedIndexSet, PeakConfig, detect_peaks, fill_gaps
from .pipeline import AugmentationRequest, AugmentationResult, augment_ecg, augment_eeg

__version__ = "0.1.0"

__all__ = [
    "AugmentationRequest", "AugmentationResult", "ChangepointConfig", "ChangepointSet",
    "FixedIndexSet", "IaaftConfig", "PeakConfig", "Signal", "SpectralReport", "SurrogateSet",
    "augment_ecg", "augment_eeg", "compare", "detect_changepoints", "detect_peaks",
    "fill_gaps", "iaaft", "iaaft_fixed_edges", "iaaft_fixed_points", "smooth_preserving_peaks",
]
