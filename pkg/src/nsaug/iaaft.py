"""
iAAFT surrogate engines.

Three variants share one refinement loop:

* ``iaaft``              -- classic iterative amplitude-adjusted Fourier transform;
* ``iaaft_fixed_edges``  -- leading/trailing samples pinned to the original so
  that segment surrogates can be concatenated without boundary artefacts;
* ``iaaft_fixed_points`` -- arbitrary samples (e.g. ECG R-peaks and their
  neighbours) pinned to the original.

Every iteration is a phase step (impose the original amplitude spectrum on the
current phases) followed by an amplitude step (rank-match the free samples to
the sorted original free values, then restore pinned samples), so the returned
surrogates are exact permutations of the original on the free positions.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .core import Signal
from .errors import InvalidMarginError, InvalidSignalError
from .peaks import DETECTED_PEAK, FixedIndexSet

FIXED_EDGES_MAX_ITER = 1000
FIXED_POINTS_MAX_ITER = 3000
# starting values of the stop rule's MSE bookkeeping
_MSE_START = 100.0
_MSE_INIT = 1000.0


@dataclass(frozen=True)
class IaaftConfig:
    """Settings shared by the three engines.

    ``max_iter=None`` selects the engine default (1000 for plain and
    fixed-edges, 3000 for fixed-points).
    """

    n_surrogates: int = 1
    max_iter: int | None = None
    mse_threshold: float = 1e-6
    edge_fraction: float = 0.10
    point_margin: int = 5
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_surrogates < 1:
            raise ValueError("n_surrogates must be >= 1")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.mse_threshold > 0:
            raise ValueError("mse_threshold must be positive")
        if not 0 <= self.edge_fraction < 0.5:
            raise ValueError(f"edge_fraction must lie in [0, 0.5), got {self.edge_fraction}")
        if self.point_margin < 0:
            raise ValueError("point_margin must be >= 0")

    def to_dict(self):
        return asdict(self)


@dataclass
class SurrogateSet:
    surrogates: np.ndarray  # shape (n_surrogates, N)
    iterations_used: np.ndarray
    final_spectrum_mse: np.ndarray
    fixed_mask: np.ndarray | None = field(default=None, repr=False)
    degenerate: bool = False

    def __len__(self):
        return self.surrogates.shape[0]

    def __getitem__(self, i):
        return self.surrogates[i]


def surrogate_rng(seed, index: int, stream=()) -> np.random.Generator:
    """Counter-based generator for surrogate ``index`` of a given stream.

    ``stream`` lets callers (e.g. the pipeline) derive independent streams per
    channel and segment from a single user seed.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(s) for s in stream), int(index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _samples(signal) -> np.ndarray:
    if isinstance(signal, Signal):
        return signal.samples
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise InvalidSignalError("expected a finite 1-D series")
    return x


def spectrum_mse(amp: np.ndarray, r: np.ndarray) -> float:
    """Mean squared error between ``|FFT(r)|`` and the target amplitude spectrum."""
    d = np.abs(np.fft.fft(r)) - amp
    return float(np.mean(d * d))


def _half_weights(n: int) -> np.ndarray:
    # multiplicity of each rfft bin in the full two-sided spectrum
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w


def _refine(x, amp, free, pinned_values, pinned, max_iter, threshold, rng):
    """Run the shuffle + phase/amplitude loop for one surrogate.

    ``free`` are the positions whose values are permuted; ``pinned`` positions
    are overwritten with ``pinned_values`` after every amplitude step.
    """
    n = x.size
    target = np.sort(x[free], kind="stable")
    half = amp[: n // 2 + 1]
    weights = _half_weights(n) / n
    r = x.copy()
    r[free] = x[free][rng.permutation(free.size)]
    spec = np.fft.rfft(r)
    mse, mse_prev = _MSE_INIT, _MSE_START
    it = 0
    vals = np.empty(free.size)
    while abs(mse - mse_prev) > threshold and it < max_iter:
        mse_prev = mse
        s = np.fft.irfft(half * np.exp(1j * np.angle(spec)), n=n)
        order = np.argsort(s[free], kind="stable")
        vals[order] = target
        r = s
        r[free] = vals
        r[pinned] = pinned_values
        spec = np.fft.rfft(r)
        d = np.abs(spec) - half
        mse = float(np.dot(weights, d * d))
        it += 1
    if it == 0:
        mse = spectrum_mse(amp, r)
    return r, it, mse


def _run(x, free_mask, n_iter, cfg, stream):
    n = x.size
    free = np.flatnonzero(free_mask)
    pinned = np.flatnonzero(~free_mask)
    pinned_values = x[pinned]
    amp = np.abs(np.fft.fft(x))
    out = np.empty((cfg.n_surrogates, n))
    iters = np.zeros(cfg.n_surrogates, dtype=int)
    mses = np.zeros(cfg.n_surrogates)
    for k in range(cfg.n_surrogates):
        if free.size == 0:
            out[k] = x
            mses[k] = 0.0
            continue
        rng = surrogate_rng(cfg.rng_seed, k, stream)
        out[k], iters[k], mses[k] = _refine(x, amp, free, pinned_values, pinned, n_iter,
                                            cfg.mse_threshold, rng)
    return SurrogateSet(out, iters, mses, fixed_mask=~free_mask, degenerate=free.size == 0)


def iaaft(signal, cfg: IaaftConfig = IaaftConfig(), stream=()) -> SurrogateSet:
    """Classic iAAFT surrogates: same value multiset, approximately the same spectrum."""
    x = _samples(signal)
    if x.size < 4:
        raise InvalidSignalError("iAAFT needs at least 4 samples")
    n_iter = cfg.max_iter or FIXED_EDGES_MAX_ITER
    return _run(x, np.ones(x.size, dtype=bool), n_iter, cfg, stream)


def edge_margin(n: int, edge_fraction: float) -> int:
    return int(np.floor(edge_fraction * n + 1e-9))


def iaaft_fixed_edges(signal, cfg: IaaftConfig = IaaftConfig(), stream=()) -> SurrogateSet:
    """iAAFT with the first and last ``floor(edge_fraction * N)`` samples pinned.

    Only the interior is shuffled and rank-matched (against the sorted
    original interior), so the output interior is a permutation of the
    original interior and the edges are bit-identical to the original.
    """
    x = _samples(signal)
    n = x.size
    if n < 4:
        raise InvalidSignalError("iAAFT needs at least 4 samples")
    margin = edge_margin(n, cfg.edge_fraction)
    if 2 * margin >= n:
        raise InvalidMarginError(f"edge margin {margin} leaves no free samples in a length-{n} segment")
    free = np.ones(n, dtype=bool)
    free[:margin] = False
    free[n - margin:] = False
    return _run(x, free, cfg.max_iter or FIXED_EDGES_MAX_ITER, cfg, stream)


def expand_fixed(indices, n: int, margin: int) -> np.ndarray:
    """Union of the clipped windows ``[i - margin, i + margin]`` as a boolean mask."""
    mask = np.zeros(n, dtype=bool)
    for i in np.asarray(indices, dtype=int):
        if not 0 <= i < n:
            raise IndexError(f"fixed index {i} outside [0, {n})")
        mask[max(0, i - margin): min(n, i + margin + 1)] = True
    return mask


def iaaft_fixed_points(signal, fixed, cfg: IaaftConfig = IaaftConfig(), stream=()) -> SurrogateSet:
    """iAAFT with every fixed index and its ``point_margin`` neighbours pinned.

    ``fixed`` is a :class:`FixedIndexSet` or any sequence of indices. If every
    sample ends up pinned the originals are returned and ``degenerate`` is set.
    """
    x = _samples(signal)
    n = x.size
    idx = fixed.indices if isinstance(fixed, FixedIndexSet) else fixed
    pinned = expand_fixed(idx, n, cfg.point_margin)
    return _run(x, ~pinned, cfg.max_iter or FIXED_POINTS_MAX_ITER, cfg, stream)


def smooth_preserving_peaks(surrogate, fixed, sigma: float = 5.0) -> np.ndarray:
    """Gaussian smoothing that leaves detected peaks untouched.

    Detected-peak samples are dropped and bridged by linear interpolation, the
    result is convolved with a normalised Gaussian (half-width 4 sigma,
    reflected edges), and the peak samples are put back. Gap-fill points are
    smoothed like any other sample.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    s = np.asarray(surrogate, dtype=float)
    if isinstance(fixed, FixedIndexSet):
        peaks = fixed.indices[fixed.kinds == DETECTED_PEAK]
    else:
        peaks = np.asarray(fixed, dtype=int)
    n = s.size
    keep = np.ones(n, dtype=bool)
    keep[peaks] = False
    bridged = s.copy()
    if peaks.size and keep.any():
        pos = np.arange(n)
        bridged[~keep] = np.interp(pos[~keep], pos[keep], s[keep])
    out = gaussian_filter1d(bridged, sigma, mode="reflect", truncate=4.0)
    out[peaks] = s[peaks]
    return out
