import numpy as np
import pytest

from config import SmoothingConfig
from detection.labeling import OpSeries
from detection.postprocess import detect_peaks, find_peaks, gaussian_kernel, smooth
from utils.errors import ConfigError


def _series(values, w_s=4.0, spacing=1.0):
    values = np.asarray(values, dtype=np.float64)
    starts = np.arange(values.size) * spacing
    return OpSeries(values=values, partition_start_times=starts, w=int(w_s / spacing) + 1, w_s=w_s)


class TestKernel:
    def test_sums_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            kernel = gaussian_kernel(rng.uniform(0.1, 20.0), int(rng.integers(1, 60)))
            assert abs(kernel.sum() - 1.0) <= 1e-12

    def test_symmetric_with_peak_at_center(self):
        kernel = gaussian_kernel(2.0, 5)
        assert kernel.size == 11
        np.testing.assert_allclose(kernel, kernel[::-1])
        assert kernel.argmax() == 5

    def test_huge_sigma_is_uniform(self):
        np.testing.assert_allclose(gaussian_kernel(1e6, 3), np.full(7, 1.0 / 7.0))

    @pytest.mark.parametrize("sigma,radius", [(0.0, 3), (-1.0, 3), (1.0, 0)])
    def test_invalid(self, sigma, radius):
        with pytest.raises(ConfigError):
            gaussian_kernel(sigma, radius)


class TestSmooth:
    def test_constant_series_is_unchanged_everywhere(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            level = rng.uniform(-5.0, 5.0)
            config = SmoothingConfig(sigma=rng.uniform(0.2, 10.0), radius=int(rng.integers(1, 50)))
            smoothed = smooth(_series(np.full(n, level)), config)
            assert np.max(np.abs(smoothed.values - level)) <= 1e-12

    def test_keeps_partitions(self):
        series = _series([0.0, 1.0, 0.0, 0.0, 2.0])
        smoothed = smooth(series, SmoothingConfig(sigma=1.0, radius=2))
        np.testing.assert_array_equal(smoothed.partition_start_times, series.partition_start_times)

    def test_interior_point_is_weighted_average(self):
        values = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
        kernel = gaussian_kernel(1.0, 1)
        smoothed = smooth(_series(values), SmoothingConfig(sigma=1.0, radius=1))
        assert smoothed.values[2] == pytest.approx(kernel[1])
        assert smoothed.values[1] == pytest.approx(kernel[0])

    def test_boundary_renormalizes(self):
        values = np.array([1.0, 0.0, 0.0])
        kernel = gaussian_kernel(1.0, 1)
        smoothed = smooth(_series(values), SmoothingConfig(sigma=1.0, radius=1))
        assert smoothed.values[0] == pytest.approx(kernel[1] / (kernel[1] + kernel[2]))

    def test_never_leaves_input_range(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            values = rng.normal(size=int(rng.integers(1, 200)))
            config = SmoothingConfig(sigma=rng.uniform(0.2, 10.0), radius=int(rng.integers(1, 30)))
            smoothed = smooth(_series(values), config).values
            assert smoothed.max() <= values.max() + 1e-12
            assert smoothed.min() >= values.min() - 1e-12

    @pytest.mark.parametrize("radius", [1, 3, 8])
    def test_preserves_mean_of_long_series(self, radius):
        rng = np.random.default_rng(radius)
        values = rng.uniform(1.0, 2.0, size=2000 * radius)
        smoothed = smooth(_series(values), SmoothingConfig(sigma=radius / 2.0, radius=radius))
        assert smoothed.values.mean() == pytest.approx(values.mean(), rel=1e-3)


class TestFindPeaks:
    def test_single_peak(self):
        peaks = find_peaks(_series([0.0, 1.0, 0.0]), 0.5)
        np.testing.assert_array_equal(peaks.indices, [1])
        np.testing.assert_array_equal(peaks.times, [3.0])
        np.testing.assert_array_equal(peaks.heights, [1.0])

    def test_plateau_reports_leftmost_index(self):
        np.testing.assert_array_equal(find_peaks(_series([0.0, 1.0, 1.0, 0.0]), 0.5).indices, [1])

    def test_threshold_is_inclusive(self):
        values = [0.0, 0.5, 0.0, 0.4, 0.0]
        np.testing.assert_array_equal(find_peaks(_series(values), 0.5).indices, [1])

    def test_edges_are_not_peaks(self):
        assert len(find_peaks(_series([1.0, 0.5, 0.0, 0.5, 1.0]), 0.1)) == 0
        assert len(find_peaks(_series([1.0, 1.0, 1.0]), 0.1)) == 0

    def test_shoulder_is_not_a_peak(self):
        np.testing.assert_array_equal(find_peaks(_series([0.0, 1.0, 1.0, 2.0, 0.0]), 0.1).indices, [3])

    def test_short_series(self):
        assert len(find_peaks(_series([0.0, 1.0]), 0.0)) == 0

    def test_times_increase(self):
        values = np.sin(np.linspace(0.0, 12.0 * np.pi, 300))
        times = find_peaks(_series(values), 0.5).times
        assert times.size == 6
        assert np.all(np.diff(times) > 0)

    def test_shift_moves_threshold_with_series(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            values = rng.uniform(0.0, 1.0, size=200)
            shifted = find_peaks(_series(values + 1.0), 1.5)
            np.testing.assert_array_equal(shifted.indices, find_peaks(_series(values), 0.5).indices)

    def test_higher_threshold_keeps_a_subset(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            series = _series(rng.normal(size=300))
            thresholds = np.sort(rng.uniform(-1.0, 2.0, size=2))
            low = set(find_peaks(series, thresholds[0]).indices.tolist())
            high = set(find_peaks(series, thresholds[1]).indices.tolist())
            assert high <= low


def test_detect_peaks_on_smoothed_tent():
    values = np.zeros(60)
    values[20:31] = 1.0 - np.abs(np.arange(-5, 6)) / 5.0
    smoothed, peaks = detect_peaks(_series(values), SmoothingConfig(sigma=1.0, radius=3), 0.5)
    assert len(smoothed) == 60
    np.testing.assert_array_equal(peaks.indices, [25])
