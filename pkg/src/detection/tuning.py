"""
Post-processing hyperparameter search.

Exhaustive grid search over (sigma, radius, h) maximizing F1 of the
detected events against ground truth. Each (sigma, radius) kernel is
smoothed once and all thresholds are scored on it; kernels run on a thread
pool and their rows are merged back in grid order, so the table is the same
for any worker count.

License: MIT
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from config import SmoothingConfig, TuneGrid
from detection.evaluation import Events, match_events, peaks_to_events
from detection.labeling import OpSeries
from detection.postprocess import find_peaks, smooth
from utils.errors import ValidationError
from utils.io import read_key_values, write_key_values, write_table

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ("sigma", "radius", "threshold", "precision", "recall", "f1")


@dataclass(frozen=True)
class TuneRow:
    sigma: float
    radius: int
    threshold: float
    precision: float
    recall: float
    f1: float
    n_peaks: int


@dataclass(frozen=True)
class TuneResult:
    """
    Attributes:
        best (Tuple[float, int, float]): (sigma, radius, threshold)
        best_f1 (float): max f1 over the table
        table (Tuple[TuneRow, ...]): one row per grid point, grid order
    """
    best: Tuple[float, int, float]
    best_f1: float
    table: Tuple[TuneRow, ...]

    @property
    def smoothing(self) -> SmoothingConfig:
        return SmoothingConfig(sigma=self.best[0], radius=self.best[1])

    @property
    def threshold(self) -> float:
        return self.best[2]


def _score_kernel(
    predicted: OpSeries,
    truth: Events,
    sigma: float,
    radius: int,
    thresholds: List[float],
    tolerance: float,
    w_s: float,
) -> List[TuneRow]:
    smoothed = smooth(predicted, SmoothingConfig(sigma=sigma, radius=radius))
    rows = []
    for threshold in thresholds:
        peaks = find_peaks(smoothed, threshold)
        report = match_events(peaks_to_events(peaks, w_s), truth, tolerance)
        rows.append(
            TuneRow(
                sigma=sigma,
                radius=radius,
                threshold=threshold,
                precision=report.precision,
                recall=report.recall,
                f1=report.f1,
                n_peaks=len(peaks),
            )
        )
    return rows


def tune(
    predicted: OpSeries,
    truth: Events,
    grid: TuneGrid,
    tolerance: float,
    w_s: float,
    workers: Optional[int] = None,
) -> TuneResult:
    """
    Score every grid point and pick the first one with the highest F1.

    Args:
        predicted (OpSeries): Raw predicted op series
        truth: Ground-truth events for the same span
        grid (TuneGrid): Search space
        tolerance (float): Matching tolerance delta (seconds)
        w_s (float): Predicted event duration (seconds)
        workers (int, optional): Thread count; None lets the executor decide

    Raises:
        ValidationError: empty predicted series
        ConfigError: invalid grid
    """
    if len(predicted) == 0:
        raise ValidationError("cannot tune on an empty predicted series")
    grid.validate()

    # Group grid points by kernel, preserving grid order.
    kernels: Dict[Tuple[float, int], List[float]] = {}
    for sigma, radius, threshold in grid.combinations():
        kernels.setdefault((sigma, radius), []).append(threshold)
    keys = list(kernels)

    logger.info(f"🔍 Tuning {len(grid)} combination(s) over {len(keys)} kernel(s)")
    rows_by_kernel: Dict[int, List[TuneRow]] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {
            executor.submit(
                _score_kernel, predicted, truth, sigma, radius, kernels[(sigma, radius)], tolerance, w_s
            ): index
            for index, (sigma, radius) in enumerate(keys)
        }
        for future in as_completed(future_to_index):
            rows_by_kernel[future_to_index[future]] = future.result()

    table = tuple(row for index in range(len(keys)) for row in rows_by_kernel[index])
    best_row = table[0]
    for row in table[1:]:
        if row.f1 > best_row.f1:
            best_row = row

    result = TuneResult(
        best=(best_row.sigma, best_row.radius, best_row.threshold),
        best_f1=best_row.f1,
        table=table,
    )
    logger.info(
        f"✓ Best: sigma={best_row.sigma}, radius={best_row.radius}, h={best_row.threshold} "
        f"(f1={best_row.f1:.4f})"
    )
    return result


def write_tune_table(result: TuneResult, path: Union[str, Path]) -> Path:
    """Delimited table: sigma, radius, threshold, precision, recall, f1."""
    frame = pd.DataFrame(
        [[row.sigma, row.radius, row.threshold, row.precision, row.recall, row.f1] for row in result.table],
        columns=list(TABLE_COLUMNS),
    )
    return write_table(path, frame)


def write_best(result: TuneResult, path: Union[str, Path]) -> Path:
    return write_key_values(
        path,
        {"sigma": result.best[0], "radius": result.best[1], "threshold": result.best[2], "f1": result.best_f1},
    )


def load_best(path: Union[str, Path]) -> Tuple[SmoothingConfig, float]:
    """Read (SmoothingConfig, threshold) back from write_best() output."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"tuning result not found: {path}")
    try:
        raw = read_key_values(path)
        smoothing = SmoothingConfig(sigma=float(raw["sigma"]), radius=int(raw["radius"]))
        threshold = float(raw["threshold"])
    except (KeyError, ValueError) as e:
        raise ValidationError(f"{path}: malformed tuning result ({e})")
    smoothing.validate()
    return smoothing, threshold
