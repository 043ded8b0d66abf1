"""
Overlap Labeling Module

Computes the overlapping parameter op(p_i): for each partition p_i of w
consecutive steps, starting at t_i and lasting w_s = (w-1)*s, the largest
Jaccard ratio (intersection over union of durations) against any adjusted
event. This is the regression target the model learns.

For an adjusted event (tau1, tau2 = tau1 + w_s) the ratio has a piecewise
form:

    |t_i - tau1| >= w_s          -> 0                       (not close)
    t_i in (tau1 - w_s, tau1]    -> (t_i + w_s - tau1) / (tau2 - t_i)
    t_i in (tau1, tau2)          -> (tau2 - t_i) / (t_i + w_s - tau1)

Both branches equal (w_s - |d|) / (w_s + |d|) with d = t_i - tau1, a tent
peaking at 1 when the partition coincides with the event.

License: MIT
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from data.series import AdjustedEventSet, TimeSeries
from utils.errors import DurationMismatch, ValidationError, WindowTooLarge
from utils.io import write_table

logger = logging.getLogger(__name__)

# Relative tolerance on tau2 - tau1 == w_s.
DURATION_RTOL = 1e-9


@dataclass(frozen=True)
class OpSeries:
    """
    One op value per partition index i in I = {0, ..., N - w}.

    Attributes:
        values (np.ndarray): op(p_i); ground truth lies in [0, 1], predictions
            are raw network outputs and may leave that range
        partition_start_times (np.ndarray): t_i for each value
        w (int): window size in steps
        w_s (float): partition duration in seconds, (w-1)*s
    """
    values: np.ndarray
    partition_start_times: np.ndarray
    w: int
    w_s: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        times = np.asarray(self.partition_start_times, dtype=np.float64).reshape(-1)
        if values.shape != times.shape:
            raise ValidationError(
                f"{values.size} op values for {times.size} partition start times"
            )
        values.flags.writeable = False
        times.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "partition_start_times", times)

    def __len__(self) -> int:
        return self.values.size

    @property
    def mid_times(self) -> np.ndarray:
        """Partition mid-times t_i + w_s/2, where op peaks mark event midpoints."""
        return self.partition_start_times + self.w_s / 2.0

    def slice(self, start: int, stop: int) -> "OpSeries":
        return OpSeries(
            values=self.values[start:stop],
            partition_start_times=self.partition_start_times[start:stop],
            w=self.w,
            w_s=self.w_s,
        )

    def with_values(self, values: np.ndarray) -> "OpSeries":
        """Same partitions, new values (used for predictions and smoothing)."""
        return OpSeries(values=values, partition_start_times=self.partition_start_times, w=self.w, w_s=self.w_s)


def _check_duration(tau1: float, tau2: float, w_s: float) -> None:
    if abs((tau2 - tau1) - w_s) > DURATION_RTOL * w_s:
        raise DurationMismatch(
            f"event ({tau1}, {tau2}) lasts {tau2 - tau1}s, expected w_s={w_s}s"
        )


def _op_piecewise(t: np.ndarray, tau1: float, tau2: float, w_s: float) -> np.ndarray:
    """Vectorized piecewise op against one adjusted event."""
    t = np.asarray(t, dtype=np.float64)
    result = np.zeros_like(t)

    # Closeness gate first; t == tau2 falls out here as well.
    close = np.abs(t - tau1) < w_s
    before = close & (t <= tau1)
    inside = close & (t > tau1) & (t < tau2)

    tb = t[before]
    result[before] = (tb + w_s - tau1) / (tau2 - tb)
    ti = t[inside]
    result[inside] = (tau2 - ti) / (ti + w_s - tau1)

    # Coincident start is an exact match.
    result[t == tau1] = 1.0
    return result


def op_single(t_i: float, event: Tuple[float, float], w_s: float) -> float:
    """
    Overlap ratio between the partition [t_i, t_i + w_s] and one adjusted event.

    Args:
        t_i (float): partition start time (seconds)
        event (Tuple[float, float]): adjusted interval (tau1, tau2)
        w_s (float): partition duration (seconds)

    Returns:
        float: op in [0, 1]

    Raises:
        DurationMismatch: tau2 - tau1 differs from w_s

    Example:
        >>> op_single(10.0, (10.0, 14.0), 4.0)
        1.0
        >>> op_single(12.0, (10.0, 14.0), 4.0)   # partition starts at the midpoint
        0.3333333333333333
    """
    tau1, tau2 = float(event[0]), float(event[1])
    _check_duration(tau1, tau2, w_s)
    return float(_op_piecewise(np.array([t_i], dtype=np.float64), tau1, tau2, w_s)[0])


def op_series(series: TimeSeries, events: AdjustedEventSet, w: int) -> OpSeries:
    """
    Ground-truth op for every partition of the series.

    op(p_i) = max over events of op_single(t_i, e, w_s); all zeros when the
    event set is empty. Events extending past the series bounds contribute to
    whichever partitions exist.

    Raises:
        WindowTooLarge: w > N or w < 2
        DurationMismatch: an event is not of duration w_s
    """
    if not 2 <= w <= series.n_steps:
        raise WindowTooLarge(w, series.n_steps)

    w_s = series.window_duration(w)
    starts = series.timestamps[: series.n_steps - w + 1]
    values = np.zeros_like(starts)

    for tau1, tau2 in events:
        _check_duration(tau1, tau2, w_s)
        # Only partitions with |t_i - tau1| < w_s can be nonzero.
        lo = np.searchsorted(starts, tau1 - w_s, side="left")
        hi = np.searchsorted(starts, tau1 + w_s, side="right")
        if lo >= hi:
            continue
        np.maximum(values[lo:hi], _op_piecewise(starts[lo:hi], tau1, tau2, w_s), out=values[lo:hi])

    logger.info(
        f"✓ Labeled {starts.size} partition(s) against {len(events)} event(s) (w={w}, w_s={w_s})"
    )
    return OpSeries(values=values, partition_start_times=starts, w=w, w_s=w_s)


def op_oracle(
    t_i: float,
    event: Tuple[float, float],
    w_s: float,
    grid_step: float,
    sampled: bool = False,
) -> float:
    """
    Independent Jaccard ratio of [t_i, t_i + w_s] and [tau1, tau2].

    The default path uses exact interval arithmetic. With sampled=True the
    durations are measured by counting grid points spaced grid_step apart,
    which converges to the exact ratio as grid_step shrinks. Both apply the
    closeness gate |t_i - tau1| < w_s.

    Args:
        grid_step (float): must be <= w_s / 1000
    """
    if grid_step > w_s / 1000.0:
        raise ValidationError(f"grid_step {grid_step} exceeds w_s/1000 = {w_s / 1000.0}")
    tau1, tau2 = float(event[0]), float(event[1])
    if not abs(t_i - tau1) < w_s:
        return 0.0

    a_lo, a_hi = t_i, t_i + w_s
    if sampled:
        lo = min(a_lo, tau1)
        hi = max(a_hi, tau2)
        grid = lo + (np.arange(int(np.ceil((hi - lo) / grid_step))) + 0.5) * grid_step
        in_a = (grid >= a_lo) & (grid < a_hi)
        in_e = (grid >= tau1) & (grid < tau2)
        union = np.count_nonzero(in_a | in_e)
        return float(np.count_nonzero(in_a & in_e) / union) if union else 0.0

    intersection = max(0.0, min(a_hi, tau2) - max(a_lo, tau1))
    union = (a_hi - a_lo) + (tau2 - tau1) - intersection
    return intersection / union if union > 0 else 0.0


def write_op_series(series: OpSeries, path: Union[str, Path]) -> Path:
    """Export columns partition_start_time, op."""
    frame = pd.DataFrame({"partition_start_time": series.partition_start_times, "op": series.values})
    return write_table(path, frame)


def write_op_comparison(predicted: OpSeries, truth: OpSeries, path: Union[str, Path]) -> Path:
    """Export predicted next to ground-truth op on the same partitions, for plotting."""
    if len(predicted) != len(truth) or not np.array_equal(
        predicted.partition_start_times, truth.partition_start_times
    ):
        raise ValidationError("predicted and true op series cover different partitions")
    frame = pd.DataFrame(
        {
            "partition_start_time": predicted.partition_start_times,
            "predicted_op": predicted.values,
            "true_op": truth.values,
        }
    )
    return write_table(path, frame)
