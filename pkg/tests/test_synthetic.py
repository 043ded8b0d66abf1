import numpy as np
import pytest

from config import SynthConfig
from data.synthetic import generate, imbalance_ratio, signature
from utils.errors import ConfigError, InfeasiblePlacement


def test_deterministic_under_seed(small_synth_config):
    first_series, first_events = generate(small_synth_config)
    second_series, second_events = generate(small_synth_config)
    np.testing.assert_array_equal(first_series.values, second_series.values)
    assert first_events == second_events


def test_shape_and_event_count(small_synth_config):
    series, events = generate(small_synth_config)
    assert series.values.shape == (1000, 2)
    assert len(events) == 6
    assert all(start == end for start, end in events)


def test_events_respect_gap_and_margin(small_synth_config):
    series, events = generate(small_synth_config)
    mids = events.midpoints
    assert np.all(np.diff(mids) >= small_synth_config.min_event_gap)
    assert mids.min() >= small_synth_config.event_width / 2.0
    assert mids.max() <= series.end_time - small_synth_config.event_width / 2.0


def test_noiseless_pulse_peaks_at_midpoints(small_synth_config):
    series, events = generate(small_synth_config)
    steps = (events.midpoints / series.spacing).astype(int)
    np.testing.assert_allclose(series.values[steps], small_synth_config.amplitude)
    assert np.count_nonzero(series.values[:, 0]) == 6 * 9


def test_noise_changes_baseline():
    config = SynthConfig(n_steps=2000, n_events=0, noise_std=0.3, min_event_gap=20.0, event_width=10.0)
    series, _ = generate(config)
    assert 0.27 < np.std(series.values) < 0.33


def test_infeasible_placement():
    config = SynthConfig(n_steps=1000, n_events=10, min_event_gap=100.0, event_width=10.0)
    with pytest.raises(InfeasiblePlacement):
        generate(config)


def test_zero_events():
    series, events = generate(SynthConfig(n_steps=100, n_events=0, event_width=10.0, min_event_gap=20.0))
    assert len(events) == 0
    assert not series.values.any()


def test_gap_must_cover_two_widths():
    with pytest.raises(ConfigError):
        generate(SynthConfig(min_event_gap=30.0, event_width=20.0))


class TestSignature:
    offsets = np.array([-6.0, -5.0, -2.5, 0.0, 2.5, 5.0])

    def test_pulse(self):
        values = signature("pulse", self.offsets, 10.0, 2.0)
        np.testing.assert_allclose(values, [0.0, 0.0, 1.0, 2.0, 1.0, 0.0], atol=1e-12)

    def test_step_change(self):
        np.testing.assert_array_equal(signature("step-change", self.offsets, 10.0, 1.0), [0, 1, 1, 1, 1, 1])

    def test_drift(self):
        np.testing.assert_allclose(signature("drift", self.offsets, 10.0, 1.0), [0.0, 0.0, 0.25, 0.5, 0.75, 1.0])

    def test_unknown(self):
        with pytest.raises(ValueError):
            signature("spike", self.offsets, 10.0, 1.0)


def test_imbalance_ratio(small_synth_config):
    series, events = generate(small_synth_config)
    # 7 steps lie strictly within 4 s of each midpoint
    assert imbalance_ratio(series, events, 4.0) == pytest.approx(6 * 7 / 1000)


@pytest.mark.parametrize(
    "n_steps, spacing, n_events, gap, width, w",
    [
        (2000, 1.0, 10, 100.0, 20.0, 21),
        (1000, 0.5, 5, 40.0, 10.0, 11),
        (5000, 4.0, 15, 600.0, 300.0, 76),
    ],
)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_imbalance_stays_below_event_share(n_steps, spacing, n_events, gap, width, w, seed):
    config = SynthConfig(n_steps=n_steps, spacing=spacing, n_events=n_events, min_event_gap=gap,
                         event_width=width, noise_std=0.0, seed=seed)
    series, events = generate(config)
    w_s = series.window_duration(w)
    assert imbalance_ratio(series, events, w_s) < 2 * n_events * w_s / (n_steps * spacing)
