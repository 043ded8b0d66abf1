"""
Synthetic Event Data Generator

Builds multivariate series with a known set of injected events:

    - Gaussian baseline noise per feature (noise_std, may be 0)
    - at each event midpoint a signature spanning event_width seconds,
      added to every feature:
        pulse:        amplitude * cos^2(pi * d / width) for |d| < width/2
        step-change:  amplitude on |d| <= width/2
        drift:        linear ramp 0 -> amplitude across |d| <= width/2
      where d is the time from the midpoint.

Midpoints lie on the sampling grid and are spaced at least min_event_gap
apart. Events are returned as point events (mid, mid); they are adjusted to
duration w_s downstream like any other event file.

License: MIT
"""

import logging
from typing import Tuple, Union

import numpy as np

from config import SynthConfig
from data.series import AdjustedEventSet, EventSet, TimeSeries
from utils.errors import InfeasiblePlacement

logger = logging.getLogger(__name__)

# Placement retry bounds.
MAX_RESTARTS = 100
MAX_DRAWS_PER_EVENT = 1000


def _place_midpoints(config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Grid indices of event midpoints, sorted, pairwise >= min_event_gap apart."""
    n = config.n_events
    if n == 0:
        return np.empty(0, dtype=np.int64)
    if n * config.min_event_gap >= config.n_steps * config.spacing:
        raise InfeasiblePlacement(
            f"{n} events need {n * config.min_event_gap}s of spacing, "
            f"series spans {config.n_steps * config.spacing}s"
        )

    # Keep each signature inside the series.
    margin = int(np.ceil(config.event_width / (2.0 * config.spacing)))
    lo, hi = margin, config.n_steps - 1 - margin
    if hi < lo:
        raise InfeasiblePlacement(
            f"event_width {config.event_width}s does not fit in {config.n_steps} steps"
        )
    min_gap_steps = config.min_event_gap / config.spacing

    for _ in range(MAX_RESTARTS):
        placed = []
        for _ in range(n):
            for _ in range(MAX_DRAWS_PER_EVENT):
                candidate = int(rng.integers(lo, hi + 1))
                if all(abs(candidate - other) >= min_gap_steps for other in placed):
                    placed.append(candidate)
                    break
            else:
                break
        if len(placed) == n:
            return np.sort(np.array(placed, dtype=np.int64))

    raise InfeasiblePlacement(
        f"could not place {n} events {config.min_event_gap}s apart after {MAX_RESTARTS} restarts"
    )


def signature(kind: str, offsets: np.ndarray, width: float, amplitude: float) -> np.ndarray:
    """Signature values at the given time offsets from an event midpoint."""
    half = width / 2.0
    if kind == "pulse":
        inside = np.abs(offsets) < half
        return np.where(inside, amplitude * np.cos(np.pi * offsets / width) ** 2, 0.0)
    inside = np.abs(offsets) <= half
    if kind == "step-change":
        return np.where(inside, amplitude, 0.0)
    if kind == "drift":
        return np.where(inside, amplitude * (offsets + half) / width, 0.0)
    raise ValueError(f"unknown signature {kind!r}")


def generate(config: SynthConfig) -> Tuple[TimeSeries, EventSet]:
    """
    Generate a series and its point events, deterministic under config.seed.

    Raises:
        ConfigError: invalid config
        InfeasiblePlacement: events cannot be spaced min_event_gap apart
    """
    config.validate()
    rng = np.random.default_rng(config.seed)

    midpoint_steps = _place_midpoints(config, rng)
    timestamps = np.arange(config.n_steps, dtype=np.float64) * config.spacing
    if config.noise_std > 0:
        values = rng.normal(0.0, config.noise_std, size=(config.n_steps, config.n_features))
    else:
        values = np.zeros((config.n_steps, config.n_features))

    midpoints = timestamps[midpoint_steps]
    for mid in midpoints:
        bump = signature(config.event_signature, timestamps - mid, config.event_width, config.amplitude)
        values += bump[:, None]

    series = TimeSeries(start_time=0.0, spacing=config.spacing, values=values)
    events = EventSet(tuple((float(m), float(m)) for m in midpoints), centers=tuple(float(m) for m in midpoints))
    logger.info(
        f"✓ Generated {config.n_steps} x {config.n_features} series with {len(events)} "
        f"{config.event_signature} event(s) (noise_std={config.noise_std})"
    )
    return series, events


def imbalance_ratio(series: TimeSeries, events: Union[EventSet, AdjustedEventSet], w_s: float) -> float:
    """Fraction of steps within w_s of any event midpoint."""
    if len(events) == 0:
        return 0.0
    distance = np.abs(series.timestamps[:, None] - events.midpoints[None, :])
    return float(np.mean(np.any(distance < w_s, axis=1)))
