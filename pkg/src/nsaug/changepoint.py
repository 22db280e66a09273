"""
Offline changepoint detection on diagnostic sequences.

Each feature's diagnostic sequence is smoothed by a normalised exponentially
weighted average, differenced at a fixed lag, and scanned for sustained
excursions beyond a multiple of its standard deviation. Confirmed
feature-level changepoints are pooled and thinned to a minimum separation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import lfilter

from .core import FEATURES, DiagnosticSequence, RollingConfig, Signal, diagnostic_sequence
from .errors import EmptyInputError, InsufficientLengthError


@dataclass(frozen=True)
class ChangepointConfig:
    lambda_: float = 0.9
    kappa: int = 16
    sigma_mult: float = 4.0
    density: float = 0.7
    min_separation: int = 256
    warmup: int = 64
    window: int = 64

    def __post_init__(self):
        if not 0 < self.lambda_ < 1:
            raise ValueError(f"forgetting factor must lie in (0, 1), got {self.lambda_}")
        if self.kappa < 1:
            raise ValueError(f"lag must be >= 1, got {self.kappa}")
        if self.sigma_mult <= 0:
            raise ValueError("sigma_mult must be positive")
        if not 0 < self.density <= 1:
            raise ValueError(f"density must lie in (0, 1], got {self.density}")
        if self.min_separation < 1:
            raise ValueError("min_separation must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


@dataclass
class EwmaSequence:
    values: np.ndarray
    normalizers: np.ndarray
    feature: str = ""
    start_offset: int = 0
    stride: int = 1


@dataclass
class LaggedDiffSequence:
    """Lagged differences; ``values[j]`` pairs with EWMA entry ``j + kappa``."""

    values: np.ndarray
    kappa: int
    feature: str = ""
    # original-signal index of values[0] is origin + j * stride
    origin: int = 0
    stride: int = 1


@dataclass
class ChangepointSet:
    indices: np.ndarray
    per_feature: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)

    def to_dict(self):
        return {
            "indices": [int(i) for i in self.indices],
            "per_feature": {k: [int(i) for i in v] for k, v in self.per_feature.items()},
        }


def ewma(diag, lambda_: float) -> EwmaSequence:
    """Normalised exponentially weighted average.

    ``values[n] = sum_{l<=n} lambda^(n-l) x[l] / w[n]`` with
    ``w[n] = sum_{l<=n} lambda^(n-l)``, evaluated recursively as
    ``w[n] = lambda w[n-1] + 1`` and ``m[n] = m[n-1] + (x[n] - m[n-1]) / w[n]``.
    The incremental form reproduces constant input exactly.
    """
    if not 0 < lambda_ < 1:
        raise ValueError(f"forgetting factor must lie in (0, 1), got {lambda_}")
    if isinstance(diag, DiagnosticSequence):
        x = np.asarray(diag.values, dtype=float)
        meta = dict(feature=diag.feature, start_offset=diag.start_offset, stride=diag.stride)
    else:
        x = np.asarray(diag, dtype=float)
        meta = {}
    if x.size == 0:
        raise EmptyInputError("cannot average an empty diagnostic sequence")
    w = lfilter([1.0], [1.0, -lambda_], np.ones_like(x))
    gain = (1.0 / w).tolist()
    m = np.empty_like(x)
    acc = 0.0
    for n, (xn, g) in enumerate(zip(x.tolist(), gain)):
        acc += (xn - acc) * g
        m[n] = acc
    return EwmaSequence(m, w, **meta)


def lagged_diff(seq, kappa: int) -> LaggedDiffSequence:
    """``y[n] = x[n] - x[n - kappa]`` for every n with a full lag behind it."""
    if isinstance(seq, EwmaSequence):
        x = seq.values
        feature, origin, stride = seq.feature, seq.start_offset + kappa * seq.stride, seq.stride
    else:
        x = np.asarray(seq, dtype=float)
        feature, origin, stride = "", kappa, 1
    if kappa < 1:
        raise ValueError(f"lag must be >= 1, got {kappa}")
    if x.size <= kappa:
        raise InsufficientLengthError(
            f"sequence of length {x.size} is too short for lag {kappa}"
        )
    return LaggedDiffSequence(x[kappa:] - x[:-kappa], kappa, feature, origin, stride)


def _values(ld):
    return ld.values if isinstance(ld, LaggedDiffSequence) else np.asarray(ld, dtype=float)


def excursion_mask(ld, sigma_mult: float = 4.0, warmup: int = 0) -> np.ndarray:
    """Boolean mask of entries deviating from the mean by more than ``sigma_mult`` std.

    Mean and (population) std come from all entries after the first ``warmup``.
    A constant sequence has no excursions.
    """
    y = _values(ld)
    if y.size <= warmup + 1:
        raise InsufficientLengthError(
            f"need more than {warmup + 1} lagged differences, got {y.size}"
        )
    ref = y[warmup:]
    mu = ref.mean()
    sd = ref.std()
    if sd == 0 or not np.isfinite(sd):
        return np.zeros(y.size, dtype=bool)
    mask = np.abs(y - mu) > sigma_mult * sd
    mask[:warmup] = False
    return mask


def detect_excursions(ld, sigma_mult: float = 4.0, warmup: int = 0) -> np.ndarray:
    """Indices (into ``ld``) of two-sided threshold excursions."""
    return np.flatnonzero(excursion_mask(ld, sigma_mult, warmup))


def confirm_density(candidates, ld, kappa: int, density: float = 0.7,
                    sigma_mult: float = 4.0, warmup: int = 0) -> np.ndarray:
    """Keep candidates whose lag-wide neighbourhood is mostly above threshold.

    The neighbourhood of ``i`` is ``floor(i - kappa/2) .. ceil(i + kappa/2)``
    inclusive, clipped to the valid range; at least ``ceil(density * size)``
    of its entries must exceed the threshold.
    """
    candidates = np.asarray(candidates, dtype=int)
    if candidates.size == 0:
        return candidates
    mask = excursion_mask(ld, sigma_mult, warmup)
    n = mask.size
    csum = np.concatenate(([0], np.cumsum(mask)))
    lo = np.maximum(np.floor(candidates - kappa / 2).astype(int), 0)
    hi = np.minimum(np.ceil(candidates + kappa / 2).astype(int), n - 1)
    count = csum[hi + 1] - csum[lo]
    size = hi - lo + 1
    # guard against e.g. 0.7 * 10 = 7.000000000000001
    need = np.ceil(density * size - 1e-9)
    return candidates[count >= need]


def merge_and_filter(per_feature: dict, min_separation: int = 256,
                     offsets: dict | None = None) -> ChangepointSet:
    """Union of all features' changepoints, thinned greedily left to right.

    ``offsets`` maps a feature to the amount added to its indices to reach
    original-signal coordinates (missing features get 0).
    """
    offsets = offsets or {}
    translated = {
        f: np.unique(np.asarray(idx, dtype=int) + int(offsets.get(f, 0)))
        for f, idx in per_feature.items()
    }
    pooled = np.unique(np.concatenate([v for v in translated.values()] or [np.array([], int)]))
    kept = []
    for i in pooled:
        if not kept or i - kept[-1] >= min_separation:
            kept.append(int(i))
    return ChangepointSet(np.asarray(kept, dtype=int), translated)


def feature_changepoints(diag: DiagnosticSequence, cfg: ChangepointConfig) -> np.ndarray:
    """Confirmed changepoints of one diagnostic sequence, in original-signal coordinates."""
    ld = lagged_diff(ewma(diag, cfg.lambda_), cfg.kappa)
    if ld.values.size <= cfg.warmup + 1:
        raise InsufficientLengthError(
            f"feature {diag.feature!r}: {ld.values.size} lagged differences do not "
            f"cover the warmup of {cfg.warmup}"
        )
    cand = detect_excursions(ld, cfg.sigma_mult, cfg.warmup)
    conf = confirm_density(cand, ld, cfg.kappa, cfg.density, cfg.sigma_mult, cfg.warmup)
    return ld.origin + conf * ld.stride


def detect_changepoints(signal: Signal, features=FEATURES,
                        cfg: ChangepointConfig = ChangepointConfig()) -> ChangepointSet:
    """Full detector: diagnostics, smoothing, lagged differences, thresholding, pooling."""
    rolling = RollingConfig(window=cfg.window)
    per_feature = {}
    for f in features:
        diag = diagnostic_sequence(signal, f, rolling)
        per_feature[f] = feature_changepoints(diag, cfg)
    return merge_and_filter(per_feature, cfg.min_separation)


def min_length(cfg: ChangepointConfig = ChangepointConfig()) -> int:
    """Shortest signal the default feature set can be run on."""
    return cfg.window - 1 + cfg.kappa + cfg.warmup + 2

