import numpy as np
import pytest

from data.series import TimeSeries
from detection.windowing import MinMaxScaler, build_windows, fit_scaler, reconstruct_series
from utils.errors import DimensionMismatch, WindowTooLarge


def test_rows_are_time_then_feature(ramp_series):
    windows = build_windows(ramp_series, 3)
    assert len(windows) == 8
    assert windows.width == 6
    np.testing.assert_array_equal(windows.rows[0], [0.0, 0.0, 1.0, 10.0, 2.0, 20.0])
    np.testing.assert_array_equal(windows.partition_start_times[:2], [100.0, 102.0])
    assert windows.w_s == 4.0


def test_neighbors_share_shifted_entries(ramp_series):
    rows = build_windows(ramp_series, 4).rows
    f = ramp_series.n_features
    np.testing.assert_array_equal(rows[1:, :-f], rows[:-1, f:])


def test_reconstruct_series(ramp_series):
    windows = build_windows(ramp_series, 4)
    np.testing.assert_array_equal(reconstruct_series(windows), ramp_series.values)


def test_window_equal_to_series_length(ramp_series):
    assert len(build_windows(ramp_series, 10)) == 1


def test_window_too_large(ramp_series):
    with pytest.raises(WindowTooLarge):
        build_windows(ramp_series, 11)


def test_take_keeps_scaler(ramp_series):
    windows = fit_scaler(build_windows(ramp_series, 3))
    part = windows.take(2, 5)
    assert len(part) == 3
    assert part.scaler is windows.scaler


class TestMinMaxScaler:
    def test_training_rows_map_into_unit_interval(self, ramp_series):
        features = fit_scaler(build_windows(ramp_series, 3)).features()
        assert features.min() == 0.0
        assert features.max() == 1.0

    def test_constant_columns_map_to_zero(self):
        scaler = MinMaxScaler.fit(np.array([[1.0, 5.0], [3.0, 5.0]]))
        np.testing.assert_array_equal(scaler.transform(np.array([[2.0, 5.0]])), [[0.5, 0.0]])

    def test_inverse_transform(self):
        rows = np.array([[1.0, -2.0], [3.0, 6.0], [2.0, 0.0]])
        scaler = MinMaxScaler.fit(rows)
        np.testing.assert_allclose(scaler.inverse_transform(scaler.transform(rows)), rows)

    def test_width_mismatch(self, ramp_series):
        windows = build_windows(ramp_series, 3)
        scaler = MinMaxScaler.fit(np.zeros((2, 4)))
        with pytest.raises(DimensionMismatch):
            windows.with_scaler(scaler)

    def test_unscaled_features_are_raw_rows(self):
        series = TimeSeries(start_time=0.0, spacing=1.0, values=np.arange(6.0))
        windows = build_windows(series, 2)
        assert windows.features() is windows.rows
