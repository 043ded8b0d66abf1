"""
Time Series and Event Data Model

This module holds the immutable containers the whole pipeline works on, plus
file ingestion and export:

    TimeSeries          uniformly sampled N x f matrix starting at alpha with spacing s
    EventSet            sorted, pairwise disjoint ground-truth intervals [tau1, tau2]
    AdjustedEventSet    events re-centered on their midpoints with duration w_s

File formats are comma-delimited text with a header row:

    series.csv   time,<feature_1>,...,<feature_f>[,<label column>]
    events.csv   start,end

License: MIT
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from utils.errors import (
    InvalidLabel,
    InvertedInterval,
    MalformedFile,
    MissingColumn,
    NonFiniteValue,
    NonUniformSampling,
    OverlappingEvents,
    ValidationError,
)
from utils.io import write_table

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Interval = Tuple[float, float]

# Relative tolerance on inter-row gaps when checking uniform sampling.
SPACING_RTOL = 1e-9

# Rounding slack when deciding whether two re-centered intervals overlap.
_OVERLAP_SLACK = 1e-9

EVENT_COLUMNS = ("start", "end")


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.flags.writeable = False
    return array


# =============================================================================
# TIME SERIES
# =============================================================================

@dataclass(frozen=True)
class TimeSeries:
    """
    Uniformly sampled multivariate time series.

    Attributes:
        start_time (float): alpha, timestamp of the first step (seconds)
        spacing (float): s > 0, seconds between consecutive steps
        values (np.ndarray): N x f matrix of finite feature values
        feature_names (Tuple[str, ...]): f column identifiers

    The timestamp of step i (0-based) is alpha + i*s; the last one is beta.
    """
    start_time: float
    spacing: float
    values: np.ndarray
    feature_names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise ValidationError(f"values must be a 2-D matrix, got shape {values.shape}")
        n_steps, n_features = values.shape
        if n_steps < 2:
            raise ValidationError(f"a series needs N >= 2 steps, got {n_steps}")
        if n_features < 1:
            raise ValidationError("a series needs at least one feature")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise ValidationError(f"spacing must be > 0, got {self.spacing!r}")
        if not np.isfinite(self.start_time):
            raise NonFiniteValue(f"start time is not finite: {self.start_time!r}")
        if not np.all(np.isfinite(values)):
            row, col = np.argwhere(~np.isfinite(values))[0]
            raise NonFiniteValue(f"non-finite value at row {row}, feature {col}")

        names = tuple(self.feature_names) or tuple(f"x{k}" for k in range(n_features))
        if len(names) != n_features:
            raise ValidationError(
                f"{len(names)} feature names given for {n_features} feature columns"
            )

        object.__setattr__(self, "start_time", float(self.start_time))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "feature_names", names)

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def timestamps(self) -> np.ndarray:
        return self.start_time + np.arange(self.n_steps, dtype=np.float64) * self.spacing

    @property
    def end_time(self) -> float:
        """beta = alpha + (N-1)*s"""
        return self.start_time + (self.n_steps - 1) * self.spacing

    def window_duration(self, w: int) -> float:
        """w_s = (w-1)*s, the temporal span of a partition of w steps."""
        return (w - 1) * self.spacing

    def slice(self, start: int, stop: int) -> "TimeSeries":
        """Steps [start, stop) as a new series with shifted start time."""
        return TimeSeries(
            start_time=self.start_time + start * self.spacing,
            spacing=self.spacing,
            values=self.values[start:stop],
            feature_names=self.feature_names,
        )


# =============================================================================
# EVENT SETS
# =============================================================================

def _as_intervals(events: Sequence[Interval]) -> Tuple[Interval, ...]:
    return tuple((float(start), float(end)) for start, end in events)


@dataclass(frozen=True)
class EventSet:
    """
    Ground-truth (or predicted) event intervals sorted by start time.

    Ground-truth sets must be pairwise disjoint: each end must not exceed the
    next start. Touching intervals (end == next start) count as disjoint.
    Predicted sets are built with disjoint=False and may overlap.

    Sets built from exact centers (labeled steps, peaks, point events) keep
    them in `centers` so that midpoints are returned without rounding.
    """
    events: Tuple[Interval, ...] = ()
    disjoint: bool = True
    centers: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        intervals = _as_intervals(self.events)
        if self.centers is not None:
            if len(self.centers) != len(intervals):
                raise ValidationError("centers must have one entry per event")
            paired = sorted(zip(intervals, (float(c) for c in self.centers)))
            events = [event for event, _ in paired]
            object.__setattr__(self, "centers", tuple(center for _, center in paired))
        else:
            events = sorted(intervals)
        for start, end in events:
            if not (np.isfinite(start) and np.isfinite(end)):
                raise NonFiniteValue(f"non-finite event bound in ({start}, {end})")
            if end < start:
                raise InvertedInterval(start, end)
        if self.disjoint:
            for previous, current in zip(events, events[1:]):
                if previous[1] - current[0] > _OVERLAP_SLACK * max(1.0, abs(current[0])):
                    raise OverlappingEvents(previous, current)
        object.__setattr__(self, "events", tuple(events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.events)

    @property
    def starts(self) -> np.ndarray:
        return np.array([start for start, _ in self.events], dtype=np.float64)

    @property
    def ends(self) -> np.ndarray:
        return np.array([end for _, end in self.events], dtype=np.float64)

    @property
    def midpoints(self) -> np.ndarray:
        """tau_mid = (tau1 + tau2) / 2 for each event."""
        if self.centers is not None:
            return np.array(self.centers, dtype=np.float64)
        return (self.starts + self.ends) / 2.0

    @classmethod
    def from_centers(cls, centers: Sequence[float], duration: float, disjoint: bool = True) -> "EventSet":
        """Intervals [c - duration/2, c + duration/2] that remember their centers."""
        half = duration / 2.0
        centers = tuple(float(c) for c in centers)
        return cls(
            events=tuple((c - half, c + half) for c in centers),
            disjoint=disjoint,
            centers=centers,
        )

    def within(self, lo: float, hi: float) -> "EventSet":
        """Events whose midpoint lies in [lo, hi]."""
        keep = [k for k, mid in enumerate(self.midpoints) if lo <= mid <= hi]
        return EventSet(
            tuple(self.events[k] for k in keep),
            disjoint=self.disjoint,
            centers=None if self.centers is None else tuple(self.centers[k] for k in keep),
        )


@dataclass(frozen=True)
class AdjustedEventSet:
    """
    Events re-centered on their source midpoints with exact duration w_s.

    Attributes:
        events (Tuple[Interval, ...]): (tau_mid - w_s/2, tau_mid + w_s/2) per event
        source_midpoints (Tuple[float, ...]): midpoints of the source events
        w_s (float): common duration in seconds
    """
    events: Tuple[Interval, ...]
    source_midpoints: Tuple[float, ...]
    w_s: float

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.events)

    @property
    def starts(self) -> np.ndarray:
        return np.array([start for start, _ in self.events], dtype=np.float64)

    @property
    def ends(self) -> np.ndarray:
        return np.array([end for _, end in self.events], dtype=np.float64)

    @property
    def midpoints(self) -> np.ndarray:
        return np.array(self.source_midpoints, dtype=np.float64)

    def as_event_set(self) -> EventSet:
        return EventSet(self.events, centers=self.source_midpoints)

    def within(self, lo: float, hi: float) -> "AdjustedEventSet":
        """Adjusted events whose midpoint lies in [lo, hi]."""
        keep = [k for k, mid in enumerate(self.source_midpoints) if lo <= mid <= hi]
        return AdjustedEventSet(
            events=tuple(self.events[k] for k in keep),
            source_midpoints=tuple(self.source_midpoints[k] for k in keep),
            w_s=self.w_s,
        )


def _check_midpoint_gaps(midpoints: np.ndarray, w_s: float) -> None:
    """Raise OverlappingEvents when two re-centered events would intersect."""
    order = np.argsort(midpoints, kind="stable")
    ordered = midpoints[order]
    gaps = np.diff(ordered)
    close = np.flatnonzero(gaps < w_s)
    if close.size:
        k = close[0]
        first = (ordered[k] - w_s / 2.0, ordered[k] + w_s / 2.0)
        second = (ordered[k + 1] - w_s / 2.0, ordered[k + 1] + w_s / 2.0)
        raise OverlappingEvents(first, second)


def _centered(midpoints: np.ndarray, w_s: float) -> AdjustedEventSet:
    midpoints = np.sort(np.asarray(midpoints, dtype=np.float64), kind="stable")
    _check_midpoint_gaps(midpoints, w_s)
    half = w_s / 2.0
    events = tuple((float(mid - half), float(mid + half)) for mid in midpoints)
    return AdjustedEventSet(events=events, source_midpoints=tuple(float(m) for m in midpoints), w_s=float(w_s))


def adjust_events(events: Union[EventSet, AdjustedEventSet], w_s: float) -> AdjustedEventSet:
    """
    Re-center every event on its midpoint with duration exactly w_s.

    e = [tau_mid - w_s/2, tau_mid + w_s/2]

    Args:
        events: source event set (any durations)
        w_s (float): target duration in seconds, > 0

    Returns:
        AdjustedEventSet: one adjusted event per source event

    Raises:
        OverlappingEvents: two midpoints are closer than w_s

    Example:
        >>> adjust_events(EventSet(((10.0, 20.0),)), 4.0).events
        ((13.0, 17.0),)
    """
    if not w_s > 0:
        raise ValidationError(f"w_s must be > 0, got {w_s!r}")
    adjusted = _centered(events.midpoints, w_s)
    logger.debug(f"Adjusted {len(adjusted)} event(s) to duration w_s={w_s}")
    return adjusted


def labels_to_events(series: TimeSeries, labels: Sequence[float], w_s: float) -> EventSet:
    """
    Convert a per-step binary label column into fixed-duration events.

    Each 1-labeled step at timestamp c yields [c - w_s/2, c + w_s/2].

    Raises:
        InvalidLabel: labels are not all 0/1 or have the wrong length
        OverlappingEvents: two 1-labels are closer than w_s
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != (series.n_steps,):
        raise InvalidLabel(
            f"label column has {labels.size} entries for a series of {series.n_steps} steps"
        )
    if not np.all((labels == 0.0) | (labels == 1.0)):
        bad = np.flatnonzero((labels != 0.0) & (labels != 1.0))[0]
        raise InvalidLabel(f"label at row {bad} is {labels[bad]!r}, expected 0 or 1")

    centers = series.timestamps[labels == 1.0]
    adjusted = _centered(centers, w_s)
    logger.info(f"Converted {len(adjusted)} labeled step(s) into events of {w_s}s")
    return adjusted.as_event_set()


# =============================================================================
# FILE INGESTION
# =============================================================================

def _read_frame(path: PathLike, allow_empty: bool = False) -> Optional[pd.DataFrame]:
    """Parse a delimited file; None for an empty file when allow_empty."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        if allow_empty:
            return None
        raise MalformedFile(f"{path} is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise MalformedFile(f"cannot parse {path}: {e}") from e


def load_series(
    path: PathLike,
    time_column: str = "time",
    feature_columns: Optional[Sequence[str]] = None,
    exclude_columns: Sequence[str] = (),
) -> TimeSeries:
    """
    Load a uniformly sampled series from a comma-delimited file.

    Args:
        path: series file with a header row
        time_column (str): name of the timestamp column (seconds)
        feature_columns: feature names to keep; defaults to every other
            column not listed in exclude_columns
        exclude_columns: columns never treated as features (label columns)

    Returns:
        TimeSeries: spacing inferred from the first inter-row gap

    Raises:
        MalformedFile, MissingColumn, NonUniformSampling, NonFiniteValue
    """
    frame = _read_frame(path)
    if time_column not in frame.columns:
        raise MissingColumn(time_column, str(path))

    if feature_columns is None:
        feature_columns = [
            c for c in frame.columns if c != time_column and c not in set(exclude_columns)
        ]
    for column in feature_columns:
        if column not in frame.columns:
            raise MissingColumn(column, str(path))
    if len(frame) < 2:
        raise ValidationError(f"{path} holds {len(frame)} row(s); a series needs at least 2")

    try:
        times = frame[time_column].to_numpy(dtype=np.float64)
        values = frame[list(feature_columns)].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise NonFiniteValue(f"non-numeric content in {path}: {e}") from e

    if not np.all(np.isfinite(times)):
        raise NonFiniteValue(f"non-finite timestamp in {path}")

    gaps = np.diff(times)
    spacing = float(gaps[0])
    if not spacing > 0:
        raise NonUniformSampling(1, spacing, spacing)
    deviation = np.abs(gaps - spacing)
    bad = np.flatnonzero(deviation > SPACING_RTOL * spacing)
    if bad.size:
        row = int(bad[0]) + 1
        raise NonUniformSampling(row, float(gaps[bad[0]]), spacing)

    series = TimeSeries(
        start_time=float(times[0]),
        spacing=spacing,
        values=values,
        feature_names=tuple(str(c) for c in feature_columns),
    )
    logger.info(
        f"✓ Loaded series {Path(path).name}: N={series.n_steps}, f={series.n_features}, s={series.spacing}"
    )
    return series


def load_labels(path: PathLike, label_column: str) -> np.ndarray:
    """Read a 0/1 label column from a series file."""
    frame = _read_frame(path)
    if label_column not in frame.columns:
        raise MissingColumn(label_column, str(path))
    try:
        labels = frame[label_column].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidLabel(f"column '{label_column}' in {path} is not numeric: {e}") from e
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise InvalidLabel(f"column '{label_column}' in {path} is not binary")
    return labels


def load_events(path: PathLike, allow_overlap: bool = False) -> EventSet:
    """
    Load events from a delimited file with columns start and end.

    Further columns are ignored. An empty file, or a header with no rows,
    yields an empty EventSet.

    Raises:
        MalformedFile: unparseable file
        MissingColumn: no start or no end column
        NonFiniteValue: non-numeric or missing bound
        OverlappingEvents: disjointness violated (unless allow_overlap)
        InvertedInterval: an end precedes its start
    """
    path = Path(path)
    frame = _read_frame(path, allow_empty=True)
    if frame is None:
        return EventSet((), disjoint=not allow_overlap)

    for column in EVENT_COLUMNS:
        if column not in frame.columns:
            raise MissingColumn(column, str(path))
    try:
        pairs = frame[list(EVENT_COLUMNS)].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise NonFiniteValue(f"non-numeric event bound in {path}: {e}") from e
    events = EventSet(tuple(map(tuple, pairs)), disjoint=not allow_overlap)
    logger.info(f"✓ Loaded {len(events)} event(s) from {path.name}")
    return events


def write_series(
    series: TimeSeries,
    path: PathLike,
    time_column: str = "time",
    labels: Optional[Sequence[float]] = None,
    label_column: str = "label",
) -> Path:
    """Write a series (and optionally a label column) as delimited text."""
    frame = pd.DataFrame(series.values, columns=list(series.feature_names))
    frame.insert(0, time_column, series.timestamps)
    if labels is not None:
        frame[label_column] = np.asarray(labels).astype(int)
    return write_table(path, frame)


def write_events(events: Union[EventSet, AdjustedEventSet], path: PathLike) -> Path:
    """Write events with the header start,end."""
    frame = pd.DataFrame(
        {"start": events.starts, "end": events.ends}, columns=list(EVENT_COLUMNS)
    )
    return write_table(path, frame)
