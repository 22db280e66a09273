"""
R-peak detection with adaptive gap filling.

Peaks are searched on the signal and on its negation so that inverted R-peaks
are caught as well. Long peak-free stretches are then bridged by equidistant
gap-fill points, bounding the unconstrained regions of a fixed-points
surrogate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .core import Signal

DETECTED_PEAK = "detected_peak"
GAP_FILL = "gap_fill"

CONFIG_A = dict(min_distance=50, max_interval=150, point_margin=5)
CONFIG_B = dict(min_distance=60, max_interval=80, point_margin=10)


@dataclass(frozen=True)
class PeakConfig:
    """Peak-detection settings.

    ``prominence`` is an absolute threshold in signal units; ``None`` means
    half the standard deviation of the signal being scanned.
    """

    min_distance: int = 50
    max_interval: int = 150
    prominence: float | None = None

    def __post_init__(self):
        if self.min_distance < 1:
            raise ValueError("min_distance must be >= 1")
        if self.max_interval < 2:
            raise ValueError("max_interval must be >= 2")

    def to_dict(self):
        return {"min_distance": self.min_distance, "max_interval": self.max_interval,
                "prominence": self.prominence}


@dataclass
class FixedIndexSet:
    indices: np.ndarray
    kinds: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        self.kinds = np.asarray(self.kinds, dtype=object)
        if self.indices.shape != self.kinds.shape:
            raise ValueError("indices and kinds must have the same length")
        order = np.argsort(self.indices, kind="stable")
        self.indices, self.kinds = self.indices[order], self.kinds[order]
        if np.any(np.diff(self.indices) == 0):
            raise ValueError("fixed indices must be unique")

    @classmethod
    def from_peaks(cls, indices):
        indices = np.asarray(indices, dtype=int)
        return cls(indices, np.full(indices.size, DETECTED_PEAK, dtype=object))

    @property
    def peaks(self) -> np.ndarray:
        return self.indices[self.kinds == DETECTED_PEAK]

    @property
    def gap_fills(self) -> np.ndarray:
        return self.indices[self.kinds == GAP_FILL]

    def __len__(self):
        return self.indices.size

    def to_dict(self):
        return {"indices": [int(i) for i in self.indices],
                "kinds": [str(k) for k in self.kinds]}


def detect_peaks(signal: Signal, cfg: PeakConfig = PeakConfig()) -> FixedIndexSet:
    """Local maxima of the signal and of its negation, merged.

    A candidate must rise above its surroundings by the prominence threshold
    and sit at least that far from the signal median (the latter keeps flat
    baseline stretches between upright beats from being taken as inverted
    beats). Candidates closer than ``min_distance`` are resolved in favour of
    the larger deviation from the median.
    """
    x = signal.samples if isinstance(signal, Signal) else np.asarray(signal, dtype=float)
    if x.size < 3:
        return FixedIndexSet.from_peaks([])
    prom = 0.5 * float(np.std(x)) if cfg.prominence is None else float(cfg.prominence)
    if prom <= 0:
        return FixedIndexSet.from_peaks([])
    med = float(np.median(x))
    dev = x - med
    cands = []
    for y in (dev, -dev):
        idx, _ = find_peaks(y, height=prom, prominence=prom, distance=cfg.min_distance)
        cands.append(idx)
    cands = np.unique(np.concatenate(cands))
    # strongest first, ties to the earlier index
    order = sorted(cands.tolist(), key=lambda i: (-abs(dev[i]), i))
    kept = []
    for i in order:
        if all(abs(i - k) >= cfg.min_distance for k in kept):
            kept.append(i)
    return FixedIndexSet.from_peaks(sorted(kept))


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def fill_gaps(peaks: FixedIndexSet, n: int, max_interval: int) -> FixedIndexSet:
    """Insert equidistant gap-fill points so no gap exceeds ``max_interval``.

    Samples ``0`` and ``n - 1`` act as virtual anchors so that peak-free
    stretches at either end are bridged too; the anchors themselves are not
    added.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = peaks.indices
    anchors = sorted(set(idx.tolist()) | {0, n - 1})
    new = []
    for a, b in zip(anchors[:-1], anchors[1:]):
        gap = b - a
        if gap > max_interval:
            k = math.ceil(gap / max_interval) - 1
            new.extend(_round_half_up(a + j * gap / (k + 1)) for j in range(1, k + 1))
    existing = set(idx.tolist())
    new = sorted(set(new) - existing)
    return FixedIndexSet(
        np.concatenate([idx, np.asarray(new, dtype=int)]),
        np.concatenate([peaks.kinds, np.full(len(new), GAP_FILL, dtype=object)]),
    )
