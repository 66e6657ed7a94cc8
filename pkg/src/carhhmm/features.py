"""Preprocessing of raw high-frequency records into per-window observations.

The pipeline is: centred moving-average smoothing, dive segmentation on depth,
then a non-overlapping moving-window DFT that reduces each window of ``h``
samples to its mean (one value per channel) and its "wiggliness", the energy in
frequencies ``1..omega``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass
class RawSeries:
    sample_rate_hz: float
    channels: np.ndarray  # (T, d)
    depth: np.ndarray | None = None

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=float)
        if ch.ndim == 1:
            ch = ch[:, None]
        self.channels = ch
        if self.depth is not None:
            self.depth = np.asarray(self.depth, dtype=float)
            if self.depth.shape[0] != ch.shape[0]:
                raise ValueError("depth and channels must have equal length")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self):
        return self.channels.shape[0]


@dataclass(frozen=True)
class FeatureConfig:
    window_h: int = 100
    max_freq_omega: int = 10
    stride: int | None = None

    def __post_init__(self):
        if self.window_h < 1:
            raise ValueError("window_h must be positive")
        if not 1 <= self.max_freq_omega <= self.window_h - 1:
            raise ValueError(
                f"max_freq_omega must lie in [1, window_h - 1], got {self.max_freq_omega}"
            )
        if self.stride is not None and self.stride < 1:
            raise ValueError("stride must be positive")

    @property
    def step(self) -> int:
        return self.window_h if self.stride is None else self.stride


@dataclass
class WindowFeatures:
    """Per-window means ``avg`` (n, d) and wiggliness (n,) for one sequence of windows."""

    avg: np.ndarray
    wiggliness: np.ndarray

    def __post_init__(self):
        avg = np.asarray(self.avg, dtype=float)
        if avg.ndim == 1:
            avg = avg[:, None]
        self.avg = avg
        self.wiggliness = np.asarray(self.wiggliness, dtype=float).reshape(-1)
        if self.wiggliness.shape[0] != avg.shape[0]:
            raise ValueError("avg and wiggliness must describe the same number of windows")

    def __len__(self):
        return self.avg.shape[0]

    @property
    def n_dims(self) -> int:
        return self.avg.shape[1]

    @classmethod
    def empty(cls, n_dims: int = 1) -> "WindowFeatures":
        return cls(np.zeros((0, n_dims)), np.zeros(0))


@dataclass
class DiveRecord:
    dive_id: int
    duration_s: float
    windows: WindowFeatures = field(default_factory=WindowFeatures.empty)

    @property
    def n_windows(self) -> int:
        return len(self.windows)


def smooth(series: RawSeries, window_seconds: float) -> RawSeries:
    """Centred moving average of every channel (and depth) over ``window_seconds``.

    Windows are truncated at the edges, so the output has the input's length and
    boundary values average only the samples that exist.
    """
    n = len(series)
    if n == 0:
        raise ValueError("cannot smooth an empty series")
    w = int(round(window_seconds * series.sample_rate_hz))
    if w < 1:
        raise ValueError("smoothing window shorter than one sample")
    left = (w - 1) // 2
    right = w - 1 - left
    idx = np.arange(n)
    lo = np.clip(idx - left, 0, n)
    hi = np.clip(idx + right + 1, 0, n)

    def _avg(x):
        x2 = x.reshape(n, -1)
        cs = np.vstack([np.zeros((1, x2.shape[1])), np.cumsum(x2, axis=0)])
        out = (cs[hi] - cs[lo]) / (hi - lo)[:, None]
        return out.reshape(x.shape)

    depth = None if series.depth is None else _avg(series.depth)
    return RawSeries(series.sample_rate_hz, _avg(series.channels), depth)


def segment_dives(series: RawSeries, depth_threshold_m: float = 0.5,
                  min_duration_s: float = 10.0) -> list[tuple[int, int]]:
    """Half-open sample intervals ``(start, stop)`` where depth exceeds the threshold.

    Depth is positive downwards. Runs shorter than ``min_duration_s`` are dropped.
    """
    if series.depth is None:
        raise ValueError("dive segmentation needs a depth channel")
    below = series.depth > depth_threshold_m
    if not below.any():
        return []
    edges = np.diff(np.concatenate([[0], below.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    min_len = min_duration_s * series.sample_rate_hz
    return [(int(a), int(b)) for a, b in zip(starts, stops) if (b - a) >= min_len - 1e-9]


def window_transform(channels, config: FeatureConfig = FeatureConfig()) -> WindowFeatures:
    """Reduce a (T, d) record to per-window means and wiggliness.

    Windows start at multiples of the stride; a trailing partial window is
    dropped. Wiggliness is ``sum_{k=1..omega} |DFT_k|^2`` summed over channels.
    """
    x = np.asarray(channels, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    h = config.window_h
    if n < h:
        warnings.warn(f"record of {n} samples is shorter than one window ({h})", stacklevel=2)
        return WindowFeatures.empty(d)
    n_win = (n - h) // config.step + 1
    starts = np.arange(n_win) * config.step
    blocks = x[starts[:, None] + np.arange(h)[None, :]]  # (n_win, h, d)
    coef = np.fft.fft(blocks, axis=1)
    avg = blocks.mean(axis=1)
    band = coef[:, 1:config.max_freq_omega + 1, :]
    wiggle = np.sum(band.real**2 + band.imag**2, axis=(1, 2))
    return WindowFeatures(avg, wiggle)


def extract_dives(series: RawSeries, config: FeatureConfig = FeatureConfig(), *,
                  smooth_seconds: float | None = 0.1, depth_threshold_m: float = 0.5,
                  min_duration_s: float = 10.0) -> list[DiveRecord]:
    """Smooth, segment and window a raw record into a list of dives.

    Without a depth channel the whole record is treated as a single dive.
    """
    s = smooth(series, smooth_seconds) if smooth_seconds else series
    if s.depth is None:
        intervals = [(0, len(s))]
    else:
        intervals = segment_dives(s, depth_threshold_m, min_duration_s)
    dives = []
    for i, (a, b) in enumerate(intervals):
        seg = s.channels[a:b]
        if b - a >= config.window_h:
            feats = window_transform(seg, config)
        else:
            feats = WindowFeatures.empty(s.channels.shape[1])
        dives.append(DiveRecord(i, (b - a) / s.sample_rate_hz, feats))
    return dives
