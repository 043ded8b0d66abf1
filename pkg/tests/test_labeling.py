import numpy as np
import pandas as pd
import pytest

from data.series import EventSet, TimeSeries, adjust_events
from detection.labeling import op_oracle, op_series, op_single, write_op_comparison, write_op_series
from utils.errors import DurationMismatch, ValidationError, WindowTooLarge


class TestOpSingle:
    def test_exact_match_is_one(self):
        assert abs(op_single(10.0, (10.0, 14.0), 4.0) - 1.0) <= 1e-12

    def test_partition_starting_at_midpoint_is_one_third(self):
        assert abs(op_single(12.0, (10.0, 14.0), 4.0) - 1.0 / 3.0) <= 1e-12

    def test_symmetric_before_and_after(self):
        assert op_single(8.0, (10.0, 14.0), 4.0) == pytest.approx(op_single(12.0, (10.0, 14.0), 4.0))

    def test_not_close_is_zero(self):
        assert op_single(14.0, (10.0, 14.0), 4.0) == 0.0
        assert op_single(6.0, (10.0, 14.0), 4.0) == 0.0
        assert op_single(100.0, (10.0, 14.0), 4.0) == 0.0

    def test_duration_mismatch(self):
        with pytest.raises(DurationMismatch):
            op_single(10.0, (10.0, 15.0), 4.0)

    def test_matches_interval_oracle_on_random_triples(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            w_s = rng.uniform(1.0, 100.0)
            tau1 = rng.uniform(-100.0, 100.0)
            t_i = tau1 + rng.uniform(-1.5, 1.5) * w_s
            expected = op_oracle(t_i, (tau1, tau1 + w_s), w_s, grid_step=w_s / 1000.0)
            assert abs(op_single(t_i, (tau1, tau1 + w_s), w_s) - expected) <= 1e-12

    def test_lipschitz_on_same_branch(self):
        rng = np.random.default_rng(11)
        for _ in range(10_000):
            w_s = rng.uniform(0.5, 50.0)
            tau1 = rng.uniform(-100.0, 100.0)
            sign = rng.choice([-1.0, 1.0])
            d1, d2 = rng.uniform(0.0, w_s, size=2)
            t1, t2 = tau1 + sign * d1, tau1 + sign * d2
            event = (tau1, tau1 + w_s)
            delta_op = abs(op_single(t1, event, w_s) - op_single(t2, event, w_s))
            assert delta_op <= 2.0 * abs(t1 - t2) / w_s + 1e-12

    def test_strictly_decreasing_with_distance(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            w_s = rng.uniform(0.5, 50.0)
            tau1 = rng.uniform(-100.0, 100.0)
            event = (tau1, tau1 + w_s)
            distances = np.linspace(0.001, 0.999, 200) * w_s
            for sign in (-1.0, 1.0):
                ops = [op_single(tau1 + sign * u, event, w_s) for u in distances]
                assert np.all(np.diff(ops) < 0.0)

    def test_profile_peaks_at_event_midpoint(self):
        w_s = 8.0
        event = (40.0, 48.0)
        starts = event[0] + np.arange(-199, 200) * (w_s / 200.0)
        ops = np.array([op_single(t, event, w_s) for t in starts])
        mid_times = starts + w_s / 2.0
        assert mid_times[np.argmax(ops)] == 44.0
        assert ops.max() == 1.0
        assert np.count_nonzero(ops == 1.0) == 1


class TestOpOracle:
    def test_sampled_converges_to_exact(self):
        event = (10.0, 20.0)
        exact = op_oracle(13.0, event, 10.0, grid_step=0.001)
        sampled = op_oracle(13.0, event, 10.0, grid_step=0.001, sampled=True)
        assert sampled == pytest.approx(exact, abs=1e-3)

    def test_grid_step_bound(self):
        with pytest.raises(ValidationError):
            op_oracle(0.0, (0.0, 1.0), 1.0, grid_step=0.01)


class TestOpSeries:
    def test_peaks_at_event_start(self):
        series = TimeSeries(start_time=0.0, spacing=1.0, values=np.zeros((50, 1)))
        truth = adjust_events(EventSet(((25.0, 25.0),)), 4.0)
        labels = op_series(series, truth, 5)
        assert len(labels) == 46
        assert labels.w_s == 4.0
        assert labels.values[23] == 1.0
        assert labels.values.max() == 1.0
        assert np.count_nonzero(labels.values) == 7
        np.testing.assert_array_equal(labels.mid_times[:2], [2.0, 3.0])

    def test_values_within_unit_interval(self):
        series = TimeSeries(start_time=0.0, spacing=0.5, values=np.zeros((400, 2)))
        truth = adjust_events(EventSet(((20.0, 30.0), (60.0, 61.0), (150.0, 150.0))), 9.5)
        values = op_series(series, truth, 20).values
        assert values.min() >= 0.0
        assert values.max() <= 1.0

    def test_no_events_gives_zeros(self):
        series = TimeSeries(start_time=0.0, spacing=1.0, values=np.zeros((20, 1)))
        labels = op_series(series, adjust_events(EventSet(), 3.0), 4)
        assert not labels.values.any()

    def test_two_events_give_symmetric_tents(self):
        series = TimeSeries(start_time=0.0, spacing=1.0, values=np.zeros((120, 1)))
        truth = adjust_events(EventSet(((50.0, 50.0), (70.0, 70.0))), 10.0)
        values = op_series(series, truth, 11).values
        for start in (45, 65):
            assert values[start] == 1.0
            left = values[start - 9: start][::-1]
            right = values[start + 1: start + 10]
            np.testing.assert_allclose(left, right, rtol=0.0, atol=1e-12)
            assert np.all(np.diff(right) < 0.0)
        assert values[55] == 0.0
        assert np.count_nonzero(values) == 38

    def test_event_past_series_end(self):
        series = TimeSeries(start_time=0.0, spacing=1.0, values=np.zeros((20, 1)))
        truth = adjust_events(EventSet(((19.0, 19.0),)), 3.0)
        labels = op_series(series, truth, 4)
        assert labels.values[-1] == pytest.approx(op_single(16.0, truth.events[0], 3.0))

    def test_window_too_large(self):
        series = TimeSeries(start_time=0.0, spacing=1.0, values=np.zeros((5, 1)))
        with pytest.raises(WindowTooLarge):
            op_series(series, adjust_events(EventSet(), 5.0), 6)

    def test_exports(self, tmp_path):
        series = TimeSeries(start_time=0.0, spacing=1.0, values=np.zeros((10, 1)))
        labels = op_series(series, adjust_events(EventSet(((5.0, 5.0),)), 2.0), 3)
        frame = pd.read_csv(write_op_series(labels, tmp_path / "op.csv"))
        assert list(frame.columns) == ["partition_start_time", "op"]
        assert len(frame) == 8

        frame = pd.read_csv(write_op_comparison(labels, labels, tmp_path / "cmp.csv"))
        assert list(frame.columns) == ["partition_start_time", "predicted_op", "true_op"]
        with pytest.raises(ValidationError):
            write_op_comparison(labels, labels.slice(0, 4), tmp_path / "bad.csv")
