import numpy as np
import pandas as pd
import pytest

from data.series import EventSet, adjust_events
from detection.evaluation import (
    delta_stats,
    match_events,
    peaks_to_events,
    restrict_truth,
    scores,
    write_deltas,
    write_report,
)
from detection.labeling import OpSeries
from detection.postprocess import PeakList
from utils.errors import ValidationError
from utils.io import read_key_values


def _points(*mids, w_s=10.0):
    return EventSet.from_centers(mids, w_s, disjoint=False)


class TestMatchEvents:
    def test_worked_example(self, two_events):
        report = match_events(_points(101.0, 350.0), two_events, tolerance=10.0)
        assert (report.true_positives, report.false_positives, report.false_negatives) == (1, 1, 1)
        assert report.precision == report.recall == report.f1 == 0.5
        assert report.deltas == (1.0,)
        assert report.delta_mean == 1.0
        assert report.delta_std == 0.0

    def test_no_predictions(self, two_events):
        report = match_events(EventSet(), two_events, tolerance=5.0)
        assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)
        assert report.false_negatives == 2
        assert report.delta_mean is None

    def test_no_truths(self):
        report = match_events(_points(10.0), EventSet(), tolerance=5.0)
        assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)
        assert report.false_positives == 1

    def test_both_empty(self):
        report = match_events(EventSet(), EventSet(), tolerance=5.0)
        assert (report.true_positives, report.f1) == (0, 0.0)

    def test_identical_sets_score_one(self, two_events):
        report = match_events(two_events, two_events, tolerance=1.0)
        assert report.f1 == 1.0
        assert report.deltas == (0.0, 0.0)

    def test_tolerance_is_inclusive(self, two_events):
        assert match_events(_points(110.0), two_events, tolerance=10.0).true_positives == 1
        assert match_events(_points(110.5), two_events, tolerance=10.0).true_positives == 0

    def test_one_to_one(self):
        truth = EventSet(((99.0, 101.0),))
        report = match_events(_points(98.0, 101.0, 103.0), truth, tolerance=5.0)
        assert report.true_positives == 1
        assert report.false_positives == 2
        assert report.deltas == (1.0,)

    def test_nearest_pair_first(self):
        # 107->110 (3) is taken before 104->100 (4)
        truth = EventSet(((99.0, 101.0), (109.0, 111.0)))
        report = match_events(_points(104.0, 107.0), truth, tolerance=6.0)
        assert report.true_positives == 2
        assert report.deltas == (4.0, -3.0)

    def test_equal_distance_goes_to_earlier_truth(self):
        truth = EventSet(((99.0, 101.0), (109.0, 111.0)))
        report = match_events(_points(105.0), truth, tolerance=5.0)
        assert report.pairs == ((0, 0),)
        assert report.deltas == (5.0,)

    def test_adjusted_truth(self, two_events):
        truth = adjust_events(two_events, 4.0)
        assert match_events(_points(98.0, 203.0), truth, tolerance=5.0).deltas == (-2.0, 3.0)

    def test_rejects_non_positive_tolerance(self, two_events):
        with pytest.raises(ValidationError):
            match_events(two_events, two_events, tolerance=0.0)

    def test_swapping_roles_swaps_errors(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            predicted = _points(*rng.uniform(0.0, 500.0, size=int(rng.integers(0, 12))))
            truth = _points(*rng.uniform(0.0, 500.0, size=int(rng.integers(0, 12))))
            tolerance = rng.uniform(1.0, 30.0)
            forward = match_events(predicted, truth, tolerance)
            backward = match_events(truth, predicted, tolerance)
            assert backward.true_positives == forward.true_positives
            assert backward.false_positives == forward.false_negatives
            assert backward.false_negatives == forward.false_positives
            np.testing.assert_allclose(sorted(backward.deltas), sorted(-d for d in forward.deltas))

    def test_wider_tolerance_never_loses_matches(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            predicted = _points(*rng.uniform(0.0, 500.0, size=int(rng.integers(0, 12))))
            truth = _points(*rng.uniform(0.0, 500.0, size=int(rng.integers(0, 12))))
            narrow, wide = np.sort(rng.uniform(1.0, 60.0, size=2))
            assert (
                match_events(predicted, truth, wide).true_positives
                >= match_events(predicted, truth, narrow).true_positives
            )


def test_scores():
    assert scores(2, 2, 0) == (0.5, 1.0, pytest.approx(2.0 / 3.0))
    assert scores(0, 0, 0) == (0.0, 0.0, 0.0)


def test_delta_stats_population_std():
    truth = EventSet(((100.0, 100.0), (200.0, 200.0), (300.0, 300.0)))
    report = match_events(_points(102.0, 204.0, 306.0), truth, tolerance=10.0)
    mean, std = delta_stats(report)
    assert mean == pytest.approx(4.0)
    assert std == pytest.approx(np.sqrt(8.0 / 3.0))


def test_peaks_to_events():
    peaks = PeakList(times=np.array([100.0, 103.0]), heights=np.ones(2), indices=np.array([1, 4]), threshold=0.5)
    events = peaks_to_events(peaks, 10.0)
    assert events.events == ((95.0, 105.0), (98.0, 108.0))
    np.testing.assert_array_equal(events.midpoints, [100.0, 103.0])


def test_restrict_truth_to_series_span(two_events):
    series = OpSeries(values=np.zeros(20), partition_start_times=np.arange(90.0, 110.0), w=5, w_s=4.0)
    kept = restrict_truth(two_events, series)
    assert kept.events == ((95.0, 105.0),)


def test_report_files(tmp_path, two_events):
    report = match_events(_points(101.0, 350.0), two_events, tolerance=10.0)
    values = read_key_values(write_report(report, tmp_path / "match_report.txt"))
    assert values["true_positives"] == "1"
    assert float(values["f1"]) == 0.5
    deltas = pd.read_csv(write_deltas(report, tmp_path / "deltas.csv"))
    assert list(deltas["delta"]) == [1.0]


def test_report_without_matches_writes_none(tmp_path):
    report = match_events(EventSet(), EventSet(((1.0, 2.0),)), tolerance=1.0)
    values = read_key_values(write_report(report, tmp_path / "match_report.txt"))
    assert values["delta_mean"] == "none"
