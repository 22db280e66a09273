"""
End-to-end augmentation recipes.

EEG: detect changepoints, run fixed-edges iAAFT on every quasi-stationary
segment and concatenate the segment surrogates.

ECG: detect R-peaks, gap-fill, run fixed-points iAAFT around them, and smooth
everything except the detected peaks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .changepoint import ChangepointConfig, ChangepointSet, detect_changepoints, merge_and_filter
from .core import FEATURES, Signal
from .errors import EngineError, NsaugError
from .iaaft import IaaftConfig, iaaft_fixed_edges, iaaft_fixed_points, smooth_preserving_peaks
from .peaks import FixedIndexSet, PeakConfig, detect_peaks, fill_gaps

MIN_SEGMENT = 20
SMOOTHING_SIGMA = 5.0


@dataclass
class AugmentationRequest:
    """What to augment and how.

    ``channels`` is a 2-D array ``(n_channels, n_samples)`` or a 1-D array for
    a single channel; all channels share ``fs``.
    """

    channels: np.ndarray
    fs: float
    mode: str = "eeg"
    changepoint_cfg: ChangepointConfig = field(default_factory=ChangepointConfig)
    peak_cfg: PeakConfig = field(default_factory=PeakConfig)
    iaaft_cfg: IaaftConfig = field(default_factory=IaaftConfig)
    n_surrogates: int | None = None
    features: tuple = FEATURES
    union_channels: bool = False
    smoothing_sigma: float = SMOOTHING_SIGMA

    def __post_init__(self):
        x = np.asarray(self.channels, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2:
            raise ValueError("channels must be 1-D or 2-D (n_channels, n_samples)")
        self.channels = x
        if self.mode not in ("eeg", "ecg"):
            raise ValueError(f"mode must be 'eeg' or 'ecg', got {self.mode!r}")
        if self.n_surrogates is not None:
            self.iaaft_cfg = replace(self.iaaft_cfg, n_surrogates=self.n_surrogates)

    def signal(self, ch: int) -> Signal:
        return Signal(self.channels[ch], self.fs)


@dataclass
class AugmentationResult:
    surrogates: np.ndarray  # (n_surrogates, n_channels, n_samples)
    provenance: list  # per channel: ChangepointSet (eeg) or FixedIndexSet (ecg)
    diagnostics: list  # per channel: list of per-segment dicts

    def surrogate(self, k: int) -> np.ndarray:
        """Surrogate ``k`` as ``(n_channels, n_samples)``."""
        return self.surrogates[k]


def segment_bounds(n: int, changepoints) -> list:
    """Half-open ``(start, stop)`` segments; a changepoint starts a new segment."""
    cuts = sorted({int(c) for c in changepoints if 0 < c < n})
    edges = [0, *cuts, n]
    return list(zip(edges[:-1], edges[1:]))


def augment_segments(x: np.ndarray, changepoints, cfg: IaaftConfig, channel: int = 0):
    """Fixed-edges surrogates of each segment, concatenated in order."""
    n = x.size
    out = np.empty((cfg.n_surrogates, n))
    diags = []
    for seg, (a, b) in enumerate(segment_bounds(n, changepoints)):
        info = {"segment": seg, "start": a, "stop": b}
        if b - a < MIN_SEGMENT:
            out[:, a:b] = x[a:b]
            info.update(copied=True, iterations=[0] * cfg.n_surrogates,
                        final_mse=[0.0] * cfg.n_surrogates)
        else:
            try:
                res = iaaft_fixed_edges(x[a:b], cfg, stream=(channel, seg))
            except NsaugError as exc:
                raise EngineError(str(exc), channel=channel, segment=seg) from exc
            out[:, a:b] = res.surrogates
            info.update(copied=False, iterations=res.iterations_used.tolist(),
                        final_mse=res.final_spectrum_mse.tolist())
        diags.append(info)
    return out, diags


def augment_eeg(req: AugmentationRequest) -> AugmentationResult:
    """Changepoint-informed EEG surrogates, one independent set per channel."""
    if req.mode != "eeg":
        raise ValueError("augment_eeg needs mode='eeg'")
    n_ch, n = req.channels.shape
    cps = [detect_changepoints(req.signal(ch), req.features, req.changepoint_cfg)
           for ch in range(n_ch)]
    if req.union_channels and n_ch > 1:
        pooled = merge_and_filter({f"ch{ch}": cp.indices for ch, cp in enumerate(cps)},
                                  req.changepoint_cfg.min_separation)
        cps = [ChangepointSet(pooled.indices, cp.per_feature) for cp in cps]
    out = np.empty((req.iaaft_cfg.n_surrogates, n_ch, n))
    diagnostics = []
    for ch in range(n_ch):
        out[:, ch], d = augment_segments(req.channels[ch], cps[ch].indices, req.iaaft_cfg, ch)
        diagnostics.append(d)
    return AugmentationResult(out, cps, diagnostics)


def ecg_fixed_indices(x, peak_cfg: PeakConfig) -> FixedIndexSet:
    peaks = detect_peaks(x, peak_cfg)
    return fill_gaps(peaks, len(x), peak_cfg.max_interval)


def augment_ecg(req: AugmentationRequest) -> AugmentationResult:
    """Peak-preserving ECG surrogates."""
    if req.mode != "ecg":
        raise ValueError("augment_ecg needs mode='ecg'")
    n_ch, n = req.channels.shape
    out = np.empty((req.iaaft_cfg.n_surrogates, n_ch, n))
    provenance, diagnostics = [], []
    for ch in range(n_ch):
        x = req.channels[ch]
        fixed = ecg_fixed_indices(req.signal(ch), req.peak_cfg)
        try:
            res = iaaft_fixed_points(x, fixed, req.iaaft_cfg, stream=(ch,))
        except NsaugError as exc:
            raise EngineError(str(exc), channel=ch) from exc
        for k in range(res.surrogates.shape[0]):
            out[k, ch] = smooth_preserving_peaks(res.surrogates[k], fixed, req.smoothing_sigma)
        provenance.append(fixed)
        diagnostics.append([{
            "segment": 0, "start": 0, "stop": n, "copied": bool(res.degenerate),
            "pinned_samples": int(res.fixed_mask.sum()),
            "iterations": res.iterations_used.tolist(),
            "final_mse": res.final_spectrum_mse.tolist(),
        }])
    return AugmentationResult(out, provenance, diagnostics)


def augment(req: AugmentationRequest) -> AugmentationResult:
    return augment_eeg(req) if req.mode == "eeg" else augment_ecg(req)
