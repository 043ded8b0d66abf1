"""
Post-processing of the predicted op series.

Two stages turn raw network output into event mid-times:

    1. Smoothing: normalized Gaussian convolution
           P_G[k] = sum_x P[k-x] G[x] / sum_x G[x],  x in [-r_g, r_g]
       Near the edges the sums run over the in-range part of the kernel only,
       so a constant series stays constant everywhere.
    2. Peak identification: local maxima (leftmost index of a flat top) at
       or above a height threshold h. A peak at partition k marks an event
       mid-time t_k + w_s/2.

License: MIT
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Tuple, Union

import numpy as np

from config import SmoothingConfig
from detection.labeling import OpSeries, write_op_series

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PeakList:
    """
    Detected peaks, ordered by time.

    Attributes:
        times (np.ndarray): Peak mid-times tau_q (seconds), strictly increasing
        heights (np.ndarray): Smoothed op value at each peak
        indices (np.ndarray): Partition index of each peak
        threshold (float): h used to select them
    """
    times: np.ndarray
    heights: np.ndarray
    indices: np.ndarray
    threshold: float

    def __len__(self) -> int:
        return self.times.size

    def __iter__(self) -> Iterator[Tuple[float, float]]:
        return iter(zip(self.times.tolist(), self.heights.tolist()))


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """
    Normalized Gaussian taps G_sigma[x] for x = -radius..radius.

    Example:
        >>> gaussian_kernel(1e6, 3)     # effectively uniform
        array([0.14285714, 0.14285714, ...])
    """
    SmoothingConfig(sigma=sigma, radius=radius).validate()
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma)) / (np.sqrt(2.0 * np.pi) * sigma)
    return kernel / kernel.sum()


def smooth(series: OpSeries, config: SmoothingConfig) -> OpSeries:
    """
    Gaussian-smooth an op series, keeping its partitions.

    Boundary points renormalize over the kernel taps that fall inside the
    series.
    """
    n = len(series)
    if n == 0:
        return series
    kernel = gaussian_kernel(config.sigma, config.radius)
    r = config.radius

    numerator = np.convolve(series.values, kernel, mode="full")[r: r + n]
    support = np.convolve(np.ones(n), kernel, mode="full")[r: r + n]
    return series.with_values(numerator / support)


def find_peaks(series: OpSeries, threshold: float) -> PeakList:
    """
    Local maxima of the series with height >= threshold.

    A peak is an index strictly above both neighbors, or the leftmost index
    of a flat run strictly above the values on both sides of the run. Runs
    touching either end of the series are never peaks.

    Example:
        [0, 1, 0], h=0.5     -> one peak at index 1
        [0, 1, 1, 0], h=0.5  -> one peak at index 1 (plateau start)
    """
    values = series.values
    empty = np.empty(0)
    if values.size < 3:
        return PeakList(times=empty, heights=empty, indices=np.empty(0, dtype=np.int64), threshold=threshold)

    # Collapse equal neighbors into runs, then look for runs above both sides.
    run_starts = np.flatnonzero(np.r_[True, values[1:] != values[:-1]])
    run_values = values[run_starts]
    is_peak = np.zeros(run_starts.size, dtype=bool)
    if run_starts.size >= 3:
        inner = run_values[1:-1]
        is_peak[1:-1] = (inner > run_values[:-2]) & (inner > run_values[2:])

    indices = run_starts[is_peak]
    indices = indices[values[indices] >= threshold]
    peaks = PeakList(
        times=series.mid_times[indices],
        heights=values[indices],
        indices=indices.astype(np.int64),
        threshold=threshold,
    )
    logger.debug(f"Found {len(peaks)} peak(s) at h={threshold}")
    return peaks


def detect_peaks(series: OpSeries, config: SmoothingConfig, threshold: float) -> Tuple[OpSeries, PeakList]:
    """Smooth, then pick peaks; returns both for export."""
    smoothed = smooth(series, config)
    return smoothed, find_peaks(smoothed, threshold)


def write_smoothed(series: OpSeries, path: Union[str, Path]) -> Path:
    """Same layout as the op series export."""
    return write_op_series(series, path)
