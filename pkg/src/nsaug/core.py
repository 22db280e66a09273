"""
Signal container and the feature extractors that turn a raw trace into
diagnostic sequences: squared Butterworth band power, rolling moments and
rolling Hjorth complexity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal as sps

from .errors import InsufficientLengthError, InvalidBandError, InvalidSignalError

BUTTER_ORDER = 5


@dataclass(frozen=True)
class Signal:
    """A uniformly sampled, real-valued 1-D series.

    Parameters
    ----------
    samples : array_like
        Finite sample values, at least two of them.
    fs : float
        Sampling rate in Hz.
    """

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise InvalidSignalError(f"expected a 1-D series, got shape {x.shape}")
        if x.size < 2:
            raise InvalidSignalError("a signal needs at least 2 samples")
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise InvalidSignalError(f"non-finite sample at index {bad}")
        if not np.isfinite(self.fs) or self.fs <= 0:
            raise InvalidSignalError(f"sampling rate must be positive, got {self.fs}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class BandSpec:
    name: str
    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not (0 < self.low_hz < self.high_hz):
            raise InvalidBandError(
                f"band {self.name!r}: need 0 < low_hz < high_hz, got "
                f"({self.low_hz}, {self.high_hz})"
            )


THETA = BandSpec("theta", 4.0, 8.0)
ALPHA = BandSpec("alpha", 8.0, 12.0)
BETA = BandSpec("beta", 12.0, 30.0)


@dataclass(frozen=True)
class RollingConfig:
    window: int = 64
    stride: int = 1

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")


@dataclass
class DiagnosticSequence:
    """A feature-derived series on which regime changes appear as mean shifts.

    ``values[k]`` belongs to original-signal sample ``start_offset + k * stride``.
    ``degenerate`` marks windows where a variance-normalised quantity was
    undefined and replaced by 0.
    """

    feature: str
    values: np.ndarray
    start_offset: int = 0
    stride: int = 1
    degenerate: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)


def butter_band_sos(band: BandSpec, fs: float) -> np.ndarray:
    """Second-order sections of the 5th-order Butterworth bandpass for ``band``."""
    nyq = fs / 2.0
    if not (0 < band.low_hz < band.high_hz < nyq):
        raise InvalidBandError(
            f"band {band.name!r} ({band.low_hz}-{band.high_hz} Hz) must lie "
            f"inside (0, {nyq}) Hz for fs={fs}"
        )
    return sps.butter(BUTTER_ORDER, [band.low_hz, band.high_hz], btype="bandpass",
                      fs=fs, output="sos")


def bandpass_power(signal: Signal, band: BandSpec) -> DiagnosticSequence:
    """Squared output of a causal Butterworth bandpass filter.

    The filter runs forward only, so the output is aligned sample-for-sample
    with the input (``start_offset = 0``). Its state is initialised to the
    steady state for a constant input equal to the first sample, which keeps a
    DC offset from producing a start-up transient.
    """
    sos = butter_band_sos(band, signal.fs)
    x = signal.samples
    if np.ptp(x) == 0:
        # pure DC is rejected exactly; skip the roundoff the filter would leave
        return DiagnosticSequence(f"{band.name}_power", np.zeros(x.size), start_offset=0)
    zi = sps.sosfilt_zi(sos) * x[0]
    y, _ = sps.sosfilt(sos, x, zi=zi)
    return DiagnosticSequence(f"{band.name}_power", y * y, start_offset=0)


def _windows(signal: Signal, cfg: RollingConfig) -> np.ndarray:
    x = signal.samples
    if x.size < cfg.window:
        raise InsufficientLengthError(
            f"signal of length {x.size} is shorter than the rolling window ({cfg.window})"
        )
    return sliding_window_view(x, cfg.window)[:: cfg.stride]


def rolling_moment(signal: Signal, cfg: RollingConfig = RollingConfig(),
                   moment: str = "variance") -> DiagnosticSequence:
    """Rolling mean, population variance or excess kurtosis.

    Each value is attributed to the last sample of its window. Windows with
    no spread get kurtosis 0 and are flagged in ``degenerate``.
    """
    w = _windows(signal, cfg)
    mean = w.mean(axis=1)
    degenerate = None
    if moment == "mean":
        values = mean
    elif moment in ("variance", "kurtosis"):
        dev = w - mean[:, None]
        m2 = np.mean(dev * dev, axis=1)
        flat = np.ptp(w, axis=1) == 0
        m2[flat] = 0.0
        if moment == "variance":
            values = m2
        else:
            m4 = np.mean(dev**4, axis=1)
            safe = np.where(flat, 1.0, m2)
            values = np.where(flat, 0.0, m4 / (safe * safe) - 3.0)
            degenerate = flat
    else:
        raise ValueError(f"unknown moment {moment!r}; expected mean, variance or kurtosis")
    return DiagnosticSequence(moment, values, start_offset=cfg.window - 1,
                              stride=cfg.stride, degenerate=degenerate)


def hjorth_complexity(signal: Signal, cfg: RollingConfig = RollingConfig()) -> DiagnosticSequence:
    """Rolling Hjorth complexity, mobility(diff(x)) / mobility(x).

    mobility(x) = sqrt(var(diff(x)) / var(x)), with population variances taken
    inside each window. A window whose signal or first difference is constant
    yields 0 and is flagged degenerate.
    """
    if cfg.window < 3:
        raise InsufficientLengthError("Hjorth complexity needs a window of at least 3 samples")
    w = _windows(signal, cfg)
    d1 = np.diff(w, axis=1)
    d2 = np.diff(d1, axis=1)
    v0 = np.var(w, axis=1)
    v1 = np.var(d1, axis=1)
    v2 = np.var(d2, axis=1)
    degenerate = (np.ptp(w, axis=1) == 0) | (np.ptp(d1, axis=1) == 0)
    ok = ~degenerate
    values = np.zeros(w.shape[0])
    # complexity = sqrt(v2/v1) / sqrt(v1/v0) = sqrt(v2 * v0) / v1
    values[ok] = np.sqrt(v2[ok] * v0[ok]) / v1[ok]
    return DiagnosticSequence("hjorth_complexity", values, start_offset=cfg.window - 1,
                              stride=cfg.stride, degenerate=degenerate)


FEATURES = ("theta_power", "alpha_power", "beta_power", "hjorth_complexity",
            "variance", "mean", "kurtosis")

_BANDS = {"theta_power": THETA, "alpha_power": ALPHA, "beta_power": BETA}


def diagnostic_sequence(signal: Signal, feature: str,
                        rolling: RollingConfig = RollingConfig()) -> DiagnosticSequence:
    """Compute one named diagnostic sequence (see ``FEATURES``)."""
    if feature in _BANDS:
        return bandpass_power(signal, _BANDS[feature])
    if feature == "hjorth_complexity":
        return hjorth_complexity(signal, rolling)
    if feature in ("variance", "mean", "kurtosis"):
        return rolling_moment(signal, rolling, feature)
    raise ValueError(f"unknown feature {feature!r}; choose from {FEATURES}")
