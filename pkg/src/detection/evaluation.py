"""
Event-level evaluation.

Peaks become predicted events e_q = [tau_q - w_s/2, tau_q + w_s/2], which
are matched one-to-one against ground truth on midpoints within a time
tolerance delta. Candidate pairs are accepted nearest first (ties go to the
earlier truth midpoint, then the earlier predicted midpoint). Unmatched
predictions are false positives, unmatched truths false negatives, and each
match contributes a signed time difference (predicted - truth).

Degenerate ratios (0/0) are reported as 0.

License: MIT
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from data.series import AdjustedEventSet, EventSet
from detection.labeling import OpSeries
from detection.postprocess import PeakList
from utils.errors import ValidationError
from utils.io import write_key_values, write_table

logger = logging.getLogger(__name__)

Events = Union[EventSet, AdjustedEventSet]


@dataclass(frozen=True)
class MatchReport:
    """
    Outcome of matching predicted against ground-truth events.

    Attributes:
        true_positives (int): Matched pairs
        false_positives (int): Unmatched predictions
        false_negatives (int): Unmatched truths
        precision (float): TP / (TP + FP), 0 when undefined
        recall (float): TP / (TP + FN), 0 when undefined
        f1 (float): 2PR / (P + R), 0 when undefined
        deltas (Tuple[float, ...]): predicted - truth midpoint per match,
            ordered by truth midpoint
        pairs (Tuple[Tuple[int, int], ...]): (predicted index, truth index)
            per match, same order as deltas
        tolerance (float): delta used for matching
        delta_mean (float, optional): mean of deltas; None without matches
        delta_std (float, optional): population std of deltas
    """
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float
    deltas: Tuple[float, ...]
    pairs: Tuple[Tuple[int, int], ...]
    tolerance: float
    delta_mean: Optional[float] = None
    delta_std: Optional[float] = None


def peaks_to_events(peaks: PeakList, w_s: float) -> EventSet:
    """
    One interval of duration w_s centered on every peak time.

    Overlapping predicted events are kept.

    Example:
        peak at 100 s, w_s=10 -> event (95, 105)
    """
    if not w_s > 0:
        raise ValidationError(f"w_s must be > 0, got {w_s!r}")
    return EventSet.from_centers(peaks.times, w_s, disjoint=False)


def scores(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    """(precision, recall, f1) with zero for empty denominators."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _greedy_pairs(predicted_mid: np.ndarray, truth_mid: np.ndarray, tolerance: float) -> List[Tuple[int, int]]:
    if predicted_mid.size == 0 or truth_mid.size == 0:
        return []
    diff = predicted_mid[:, None] - truth_mid[None, :]
    p_idx, t_idx = np.nonzero(np.abs(diff) <= tolerance)
    # lexsort: last key is primary.
    order = np.lexsort((predicted_mid[p_idx], truth_mid[t_idx], np.abs(diff[p_idx, t_idx])))

    used_pred = np.zeros(predicted_mid.size, dtype=bool)
    used_truth = np.zeros(truth_mid.size, dtype=bool)
    pairs = []
    for k in order:
        p, t = int(p_idx[k]), int(t_idx[k])
        if used_pred[p] or used_truth[t]:
            continue
        used_pred[p] = used_truth[t] = True
        pairs.append((p, t))
    pairs.sort(key=lambda pair: (truth_mid[pair[1]], pair[1]))
    return pairs


def match_events(predicted: Events, truth: Events, tolerance: float) -> MatchReport:
    """
    Match predicted and ground-truth events one-to-one on midpoints.

    Args:
        predicted: Predicted events (may overlap)
        truth: Ground-truth events, usually adjusted
        tolerance (float): Maximum |predicted mid - truth mid| in seconds

    Returns:
        MatchReport: counts, scores and signed deltas

    Example:
        truths at 100 and 200, predictions at 101 and 350, tolerance 10
        -> TP=1, FP=1, FN=1, precision=recall=f1=0.5, deltas=(1.0,)
    """
    if not tolerance > 0:
        raise ValidationError(f"tolerance must be > 0, got {tolerance!r}")
    predicted_mid = np.asarray(predicted.midpoints, dtype=np.float64)
    truth_mid = np.asarray(truth.midpoints, dtype=np.float64)

    pairs = _greedy_pairs(predicted_mid, truth_mid, tolerance)
    tp = len(pairs)
    fp = predicted_mid.size - tp
    fn = truth_mid.size - tp
    precision, recall, f1 = scores(tp, fp, fn)
    deltas = tuple(float(predicted_mid[p] - truth_mid[t]) for p, t in pairs)

    report = MatchReport(
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        deltas=deltas,
        pairs=tuple(pairs),
        tolerance=float(tolerance),
    )
    stats = delta_stats(report)
    if stats is not None:
        report = replace(report, delta_mean=stats[0], delta_std=stats[1])
    return report


def delta_stats(report: MatchReport) -> Optional[Tuple[float, float]]:
    """
    (mean, population std) of the matched time differences.

    Returns None when nothing matched.

    Example:
        deltas (2, 4, 6) -> (4.0, 1.632993...)
    """
    if report.true_positives == 0:
        return None
    deltas = np.asarray(report.deltas, dtype=np.float64)
    return float(np.mean(deltas)), float(np.std(deltas))


def restrict_truth(truth: Events, series: OpSeries) -> Events:
    """Truth events whose midpoints fall within the series' partition mid-times."""
    if len(series) == 0:
        return truth.within(np.inf, -np.inf)
    mids = series.mid_times
    return truth.within(float(mids[0]), float(mids[-1]))


def write_report(report: MatchReport, path: Union[str, Path]) -> Path:
    """key=value summary of the match."""
    return write_key_values(
        path,
        {
            "true_positives": report.true_positives,
            "false_positives": report.false_positives,
            "false_negatives": report.false_negatives,
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
            "tolerance": report.tolerance,
            "delta_mean": report.delta_mean,
            "delta_std": report.delta_std,
        },
    )


def write_deltas(report: MatchReport, path: Union[str, Path]) -> Path:
    """Single column 'delta' for histogram plotting."""
    return write_table(path, pd.DataFrame({"delta": np.asarray(report.deltas, dtype=np.float64)}))
