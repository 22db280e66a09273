import numpy as np
import pytest
from scipy.signal import lfilter


def ar2(n, rng, a1=0.75, a2=-0.5, burn=200):
    """x_t = a1 x_{t-1} + a2 x_{t-2} + e_t"""
    e = rng.standard_normal(n + burn)
    return lfilter([1.0], [1.0, -a1, -a2], e)[burn:]


def resonant(n, f0, fs, rng, r=0.97, burn=500):
    """Unit-variance AR(2) process with a spectral peak at ``f0`` Hz."""
    th = 2 * np.pi * f0 / fs
    y = lfilter([1.0], [1.0, -2 * r * np.cos(th), r * r], rng.standard_normal(n + burn))[burn:]
    return y / y.std()


def two_regime(seed, n_half=2560, fs=256):
    rng = np.random.default_rng(seed)
    return np.concatenate([resonant(n_half, 5, fs, rng), resonant(n_half, 20, fs, rng)])


def pulse_train(seed, n=3000, noise=0.02):
    """ECG-like series: sharp R-like pulses with small Q and T companions."""
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    x = noise * rng.standard_normal(n)
    pos = []
    p = int(rng.integers(40, 120))
    while p < n - 20:
        pos.append(p)
        p += int(rng.integers(200, 320))
    for p in pos:
        x += (np.exp(-0.5 * ((t - p) / 3) ** 2)
              + 0.25 * np.exp(-0.5 * ((t - p - 60) / 12) ** 2)
              - 0.15 * np.exp(-0.5 * ((t - p + 8) / 3) ** 2))
    return x, pos


def variance_step(seed, n=10_000, sigma_after=5.0):
    rng = np.random.default_rng(seed)
    loc = int(rng.integers(1000, n - 1000))
    x = rng.standard_normal(n)
    x[loc:] *= sigma_after
    return x, loc


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
