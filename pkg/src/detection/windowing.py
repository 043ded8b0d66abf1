"""
Window Vectors

Unrolls every partition p_i into a flat vector v_i of length r = w*f, laid
out time-then-feature:

    v_i = [T(t_i)[1..f], T(t_{i+1})[1..f], ..., T(t_{i+w-1})[1..f]]

Neighboring rows therefore share (w-1)*f entries, shifted by f. An optional
per-column min-max scaler maps the training rows into [0, 1].

License: MIT
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from data.series import TimeSeries
from utils.errors import DimensionMismatch, ValidationError, WindowTooLarge

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-column affine map x -> (x - min) / (max - min); constant columns map to 0."""
    mins: np.ndarray
    maxs: np.ndarray

    @classmethod
    def fit(cls, rows: np.ndarray) -> "MinMaxScaler":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValidationError("a scaler needs at least one row to fit")
        return cls(mins=rows.min(axis=0), maxs=rows.max(axis=0))

    @property
    def width(self) -> int:
        return self.mins.size

    def _ranges(self) -> np.ndarray:
        span = self.maxs - self.mins
        return np.where(span > 0, span, 1.0)

    def transform(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.shape[-1] != self.width:
            raise DimensionMismatch(f"scaler fitted on {self.width} columns, got {rows.shape[-1]}")
        scaled = (rows - self.mins) / self._ranges()
        # Constant columns carry no information.
        scaled[..., self.maxs == self.mins] = 0.0
        return scaled

    def inverse_transform(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        restored = rows * self._ranges() + self.mins
        restored[..., self.maxs == self.mins] = self.mins[self.maxs == self.mins]
        return restored


@dataclass(frozen=True)
class WindowMatrix:
    """
    Flattened window vectors for partitions i = 0..N-w.

    Attributes:
        rows (np.ndarray): (N-w+1) x (w*f) unscaled window vectors
        w (int): window size in steps
        n_features (int): f
        partition_start_times (np.ndarray): t_i per row
        spacing (float): s, seconds between steps of the source series
        scaler (MinMaxScaler, optional): applied by features()
    """
    rows: np.ndarray
    w: int
    n_features: int
    partition_start_times: np.ndarray
    spacing: float
    scaler: Optional[MinMaxScaler] = None

    @property
    def width(self) -> int:
        """r = w*f"""
        return self.w * self.n_features

    @property
    def w_s(self) -> float:
        return (self.w - 1) * self.spacing

    def __len__(self) -> int:
        return self.rows.shape[0]

    def features(self) -> np.ndarray:
        """Rows as fed to the model: scaled when a scaler is attached."""
        if self.scaler is None:
            return self.rows
        return self.scaler.transform(self.rows)

    def take(self, start: int, stop: int) -> "WindowMatrix":
        """Rows [start, stop) keeping the scaler."""
        return replace(
            self,
            rows=self.rows[start:stop],
            partition_start_times=self.partition_start_times[start:stop],
        )

    def with_scaler(self, scaler: Optional[MinMaxScaler]) -> "WindowMatrix":
        if scaler is not None and scaler.width != self.width:
            raise DimensionMismatch(f"scaler width {scaler.width} != window width {self.width}")
        return replace(self, scaler=scaler)


def build_windows(series: TimeSeries, w: int) -> WindowMatrix:
    """
    Build v_i for every partition of w consecutive steps.

    Raises:
        WindowTooLarge: w > N or w < 2

    Example:
        N=4, f=1, w=2 with values [a, b, c, d] -> rows [a, b], [b, c], [c, d]
    """
    if not 2 <= w <= series.n_steps:
        raise WindowTooLarge(w, series.n_steps)

    n_rows = series.n_steps - w + 1
    view = np.lib.stride_tricks.sliding_window_view(series.values, (w, series.n_features))
    rows = np.ascontiguousarray(view.reshape(n_rows, w * series.n_features))
    rows.flags.writeable = False

    starts = series.timestamps[:n_rows]
    logger.debug(f"Built {n_rows} window(s) of width r={w * series.n_features}")
    return WindowMatrix(
        rows=rows, w=w, n_features=series.n_features, partition_start_times=starts, spacing=series.spacing
    )


def fit_scaler(matrix: WindowMatrix) -> WindowMatrix:
    """Record per-column min/max over the rows and attach the scaler."""
    scaler = MinMaxScaler.fit(matrix.rows)
    constant = int(np.count_nonzero(scaler.maxs == scaler.mins))
    if constant:
        logger.info(f"Scaler: {constant}/{scaler.width} constant column(s) map to 0")
    return matrix.with_scaler(scaler)


def reconstruct_series(matrix: WindowMatrix) -> np.ndarray:
    """Recover the N x f values from row 0 plus the last f entries of every later row."""
    f = matrix.n_features
    if len(matrix) == 0:
        return np.empty((0, f))
    head = matrix.rows[0].reshape(matrix.w, f)
    tail = matrix.rows[1:, -f:]
    return np.vstack([head, tail])
