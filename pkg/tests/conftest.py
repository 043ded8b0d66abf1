"""Shared fixtures: src on sys.path, fresh metrics per test, small datasets."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from config import SynthConfig  # noqa: E402
from data.series import EventSet, TimeSeries, write_events, write_series  # noqa: E402
from data.synthetic import generate  # noqa: E402
from observability import reset_global_logger  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_metrics():
    reset_global_logger()
    yield
    reset_global_logger()


@pytest.fixture
def ramp_series() -> TimeSeries:
    """10 steps, 2 features, s=2, alpha=100."""
    values = np.column_stack([np.arange(10.0), 10.0 * np.arange(10.0)])
    return TimeSeries(start_time=100.0, spacing=2.0, values=values, feature_names=("a", "b"))


@pytest.fixture
def small_synth_config() -> SynthConfig:
    """Noiseless pulses, w=11 gives w_s equal to the pulse width."""
    return SynthConfig(
        n_steps=1000,
        spacing=1.0,
        n_features=2,
        n_events=6,
        event_signature="pulse",
        noise_std=0.0,
        min_event_gap=100.0,
        event_width=10.0,
        seed=3,
    )


@pytest.fixture
def small_dataset(tmp_path, small_synth_config):
    """(series path, events path, events) for a small synthetic run."""
    series, events = generate(small_synth_config)
    series_path = write_series(series, tmp_path / "data" / "series.csv")
    events_path = write_events(events, tmp_path / "data" / "events.csv")
    return series_path, events_path, events


@pytest.fixture
def two_events() -> EventSet:
    return EventSet(((95.0, 105.0), (195.0, 205.0)))
