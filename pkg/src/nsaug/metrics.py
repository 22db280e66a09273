"""
Original-vs-surrogate comparison: periodogram, value histogram and STFT
spectrogram, each reduced to a single distance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import stft

from .core import Signal

HIST_BINS = 64
STFT_WINDOW = 256
STFT_HOP = 64


@dataclass
class SpectralReport:
    freqs: np.ndarray
    periodogram_original: np.ndarray
    periodogram_surrogate: np.ndarray
    bin_edges: np.ndarray
    hist_original: np.ndarray
    hist_surrogate: np.ndarray
    stft_freqs: np.ndarray
    stft_times: np.ndarray
    spectrogram_original: np.ndarray
    spectrogram_surrogate: np.ndarray
    stft_window: int
    stft_hop: int
    spectrum_rel_l2: float
    histogram_distance: float
    spectrogram_rel_l2: float

    def distances(self):
        return {
            "spectrum_rel_l2": self.spectrum_rel_l2,
            "histogram_distance": self.histogram_distance,
            "spectrogram_rel_l2": self.spectrogram_rel_l2,
        }

    def to_dict(self, full=False):
        d = dict(self.distances())
        d["stft_window"] = self.stft_window
        d["stft_hop"] = self.stft_hop
        d["histogram_bins"] = int(self.hist_original.size)
        if full:
            d["periodogram"] = {
                "freqs": self.freqs.tolist(),
                "original": self.periodogram_original.tolist(),
                "surrogate": self.periodogram_surrogate.tolist(),
            }
            d["histogram"] = {
                "bin_edges": self.bin_edges.tolist(),
                "original": self.hist_original.tolist(),
                "surrogate": self.hist_surrogate.tolist(),
            }
        return d

    def write_csv(self, directory, prefix=""):
        """Dump the three panels as CSV files for external plotting."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / f"{prefix}periodogram.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_hz", "original", "surrogate"])
            for row in zip(self.freqs, self.periodogram_original, self.periodogram_surrogate):
                w.writerow([repr(float(v)) for v in row])
        with open(directory / f"{prefix}histogram.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "original", "surrogate"])
            for i in range(self.hist_original.size):
                w.writerow([repr(float(self.bin_edges[i])), repr(float(self.bin_edges[i + 1])),
                            int(self.hist_original[i]), int(self.hist_surrogate[i])])
        with open(directory / f"{prefix}spectrogram.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "freq_hz", "original", "surrogate"])
            for ti, t in enumerate(self.stft_times):
                for fi, f in enumerate(self.stft_freqs):
                    w.writerow([repr(float(t)), repr(float(f)),
                                repr(float(self.spectrogram_original[fi, ti])),
                                repr(float(self.spectrogram_surrogate[fi, ti]))])


def rel_l2(estimate, reference) -> float:
    """``||estimate - reference|| / ||reference||`` (0 when both vanish)."""
    a = np.ravel(np.asarray(estimate, dtype=float))
    b = np.ravel(np.asarray(reference, dtype=float))
    num = np.linalg.norm(a - b)
    den = np.linalg.norm(b)
    if den == 0:
        return 0.0 if num == 0 else float("inf")
    return float(num / den)


def spectrum_rel_l2(original, surrogate) -> float:
    """Relative L2 error of the surrogate's FFT amplitude spectrum."""
    return rel_l2(np.abs(np.fft.fft(surrogate)), np.abs(np.fft.fft(original)))


def histograms(original, surrogate, bins=HIST_BINS):
    """Counts of both series over equal-width bins spanning the pooled range."""
    o = np.asarray(original, dtype=float)
    s = np.asarray(surrogate, dtype=float)
    lo = min(o.min(), s.min())
    hi = max(o.max(), s.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    return np.histogram(o, edges)[0], np.histogram(s, edges)[0], edges


def total_variation(p_counts, q_counts) -> float:
    p = p_counts / p_counts.sum()
    q = q_counts / q_counts.sum()
    return float(0.5 * np.abs(p - q).sum())


def spectrogram(x, fs=1.0, window=STFT_WINDOW, hop=STFT_HOP):
    """Hann-windowed STFT magnitude; returns ``(freqs, times, |Z|)``."""
    x = np.asarray(x, dtype=float)
    nperseg = min(window, x.size)
    noverlap = max(0, nperseg - min(hop, nperseg))
    f, t, z = stft(x, fs=fs, window="hann", nperseg=nperseg, noverlap=noverlap,
                   detrend=False, boundary=None, padded=False)
    return f, t, np.abs(z)


def compare(original, surrogate, stft_window=STFT_WINDOW, stft_hop=STFT_HOP,
            bins=HIST_BINS) -> SpectralReport:
    """Build the periodogram / histogram / spectrogram report for one pair."""
    if isinstance(original, Signal):
        fs, o = original.fs, original.samples
    else:
        fs, o = 1.0, np.asarray(original, dtype=float)
    s = np.asarray(surrogate, dtype=float)
    if o.shape != s.shape:
        raise ValueError(f"length mismatch: original {o.size} vs surrogate {s.size}")
    if stft_window < 2 or stft_hop < 1:
        raise ValueError("stft_window must be >= 2 and stft_hop >= 1")

    fo, fsur = np.fft.fft(o), np.fft.fft(s)
    half = o.size // 2 + 1
    freqs = np.fft.rfftfreq(o.size, d=1.0 / fs)
    ho, hs, edges = histograms(o, s, bins)
    sf, st, zo = spectrogram(o, fs, stft_window, stft_hop)
    _, _, zs = spectrogram(s, fs, stft_window, stft_hop)
    return SpectralReport(
        freqs=freqs,
        periodogram_original=np.abs(fo[:half]) ** 2,
        periodogram_surrogate=np.abs(fsur[:half]) ** 2,
        bin_edges=edges,
        hist_original=ho,
        hist_surrogate=hs,
        stft_freqs=sf,
        stft_times=st,
        spectrogram_original=zo,
        spectrogram_surrogate=zs,
        stft_window=int(stft_window),
        stft_hop=int(stft_hop),
        spectrum_rel_l2=rel_l2(np.abs(fsur), np.abs(fo)),
        histogram_distance=total_variation(ho, hs),
        spectrogram_rel_l2=rel_l2(zs, zo),
    )
