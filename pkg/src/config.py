"""
Configuration Settings Module

This module centralizes all configuration settings for the event detector:
training hyperparameters, smoothing and tuning grids, the synthetic data
generator, the end-to-end run, and observability. Every group is a frozen
dataclass with a validate() method; module-level defaults can be overridden
from the environment (or a .env file).

License: MIT
"""

import dataclasses
import logging
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

from dotenv import load_dotenv

from utils.errors import ConfigError

logger = logging.getLogger(__name__)


# =============================================================================
# TRAINING CONFIGURATION
# =============================================================================

OPTIMIZERS = ("sgd", "adam")


@dataclass(frozen=True)
class TrainConfig:
    """
    Mini-batch training settings for the regressor.

    Attributes:
        epochs (int): Passes over the training rows
        batch_size (int): Rows per gradient step
        learning_rate (float): Step size
        seed (int): Seeds the per-epoch shuffle order
        validation_fraction (float): Temporally last share of the training
            rows held out for validation loss, in (0, 0.5)
        optimizer (str): "sgd" or "adam" (beta1=0.9, beta2=0.999, eps=1e-8)
        restore_best (bool): Return the weights of the epoch with the lowest
            validation MSE instead of the last epoch

    Defaults converge on the synthetic suite at desk scale:
        adam, learning_rate 1e-3, batch_size 32, 500 epochs, 20% validation
    """
    epochs: int = 500
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    validation_fraction: float = 0.2
    optimizer: str = "adam"
    restore_best: bool = True

    def validate(self) -> None:
        """Validate configuration values."""
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 < self.validation_fraction < 0.5:
            raise ConfigError(f"validation_fraction must be in (0, 0.5), got {self.validation_fraction}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")


# Default training configuration
TRAINING = TrainConfig()


# =============================================================================
# SMOOTHING AND TUNING CONFIGURATION
# =============================================================================

@dataclass(frozen=True)
class SmoothingConfig:
    """
    Gaussian smoothing of the predicted op series.

    Attributes:
        sigma (float): Standard deviation, in steps
        radius (int): Kernel radius r_g in steps; the kernel has 2*r_g + 1 taps
    """
    sigma: float = 1.0
    radius: int = 3

    def validate(self) -> None:
        """Validate configuration values."""
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ConfigError(f"sigma must be positive and finite, got {self.sigma}")
        if self.radius < 1:
            raise ConfigError(f"radius must be >= 1, got {self.radius}")

    @classmethod
    def three_sigma(cls, sigma: float) -> "SmoothingConfig":
        """Kernel covering +/- 3 sigma."""
        return cls(sigma=float(sigma), radius=max(1, math.ceil(3.0 * sigma)))


@dataclass(frozen=True)
class TuneGrid:
    """
    Search space for (sigma, radius, threshold); the objective is always F1.

    Attributes:
        sigmas (Tuple[float, ...]): Candidate standard deviations (steps)
        radii (Tuple[int, ...], optional): Candidate radii; None derives one
            radius per sigma as ceil(3*sigma)
        thresholds (Tuple[float, ...]): Candidate peak heights h

    Grid Order:
        sigmas outer, radii middle, thresholds inner. Ties on F1 resolve to
        the earliest point in this order.
    """
    sigmas: Tuple[float, ...] = (0.5, 1.0, 2.0, 4.0, 8.0)
    radii: Optional[Tuple[int, ...]] = None
    thresholds: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

    @classmethod
    def default(cls) -> "TuneGrid":
        return cls()

    @classmethod
    def single(cls, sigma: float, radius: int, threshold: float) -> "TuneGrid":
        return cls(sigmas=(float(sigma),), radii=(int(radius),), thresholds=(float(threshold),))

    def validate(self) -> None:
        """Validate configuration values."""
        if not self.sigmas or not self.thresholds:
            raise ConfigError("sigmas and thresholds must be nonempty")
        if self.radii is not None and not self.radii:
            raise ConfigError("radii must be nonempty (or None to derive from sigma)")
        for sigma in self.sigmas:
            if not sigma > 0:
                raise ConfigError(f"every sigma must be positive, got {sigma}")
        for radius in self.radii or ():
            if radius < 1:
                raise ConfigError(f"every radius must be >= 1, got {radius}")

    def combinations(self) -> List[Tuple[float, int, float]]:
        """All (sigma, radius, threshold) points in grid order."""
        points = []
        for sigma in self.sigmas:
            radii = self.radii if self.radii is not None else (SmoothingConfig.three_sigma(sigma).radius,)
            for radius in radii:
                for threshold in self.thresholds:
                    points.append((float(sigma), int(radius), float(threshold)))
        return points

    def __len__(self) -> int:
        per_sigma = len(self.radii) if self.radii is not None else 1
        return len(self.sigmas) * per_sigma * len(self.thresholds)


# =============================================================================
# SYNTHETIC DATA CONFIGURATION
# =============================================================================

SIGNATURES = ("pulse", "step-change", "drift")


@dataclass(frozen=True)
class SynthConfig:
    """
    Synthetic series with injected event signatures.

    Attributes:
        n_steps (int): N
        spacing (float): s, seconds between steps
        n_features (int): f
        n_events (int): Number of injected events
        event_signature (str): "pulse", "step-change" or "drift"
        amplitude (float): Signature height, applied to every feature
        noise_std (float): Baseline Gaussian noise
        min_event_gap (float): Minimum seconds between event midpoints
        event_width (float): Signature width in seconds, normally w_s
        seed (int): Generator seed

    Feasibility (n_events * min_event_gap < N * s) is checked at generation
    time and reported as InfeasiblePlacement.
    """
    n_steps: int = 5000
    spacing: float = 1.0
    n_features: int = 3
    n_events: int = 10
    event_signature: str = "pulse"
    amplitude: float = 1.0
    noise_std: float = 0.0
    min_event_gap: float = 200.0
    event_width: float = 20.0
    seed: int = 0

    def validate(self) -> None:
        """Validate configuration values."""
        if self.n_steps < 2:
            raise ConfigError(f"n_steps must be >= 2, got {self.n_steps}")
        if not self.spacing > 0:
            raise ConfigError(f"spacing must be positive, got {self.spacing}")
        if self.n_features < 1:
            raise ConfigError(f"n_features must be >= 1, got {self.n_features}")
        if self.n_events < 0:
            raise ConfigError(f"n_events must be non-negative, got {self.n_events}")
        if self.event_signature not in SIGNATURES:
            raise ConfigError(f"event_signature must be one of {SIGNATURES}, got {self.event_signature!r}")
        if not self.amplitude > 0:
            raise ConfigError(f"amplitude must be positive, got {self.amplitude}")
        if self.noise_std < 0:
            raise ConfigError(f"noise_std must be non-negative, got {self.noise_std}")
        if not self.event_width > 0:
            raise ConfigError(f"event_width must be positive, got {self.event_width}")
        if self.min_event_gap < 2.0 * self.event_width:
            raise ConfigError(
                f"min_event_gap must be >= 2*event_width={2.0 * self.event_width}, got {self.min_event_gap}"
            )


# =============================================================================
# OBSERVABILITY CONFIGURATION
# =============================================================================

@dataclass(frozen=True)
class ObservabilityConfig:
    """
    Logging and metrics configuration.

    Attributes:
        log_level (str): Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file_name (str): Log file written inside the run's output directory
        metrics_file_name (str): Stage metrics JSON inside the output directory
        enable_metrics (bool): Track stage timings and counts
        enable_console_output (bool): Print to console
        log_format (str): File log format
        console_format (str): Console log format
    """
    log_level: str = "INFO"
    log_file_name: str = "run.log"
    metrics_file_name: str = "metrics.json"
    enable_metrics: bool = True
    enable_console_output: bool = True
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    console_format: str = "%(levelname)s %(message)s"

    def validate(self) -> None:
        """Validate configuration values."""
        valid_levels = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        if self.log_level not in valid_levels:
            raise ConfigError(f"log_level must be one of {valid_levels}, got {self.log_level}")


# Default observability configuration
OBSERVABILITY = ObservabilityConfig()

# Tuning worker threads; None lets the executor decide.
WORKERS: Optional[int] = None


# =============================================================================
# RUN CONFIGURATION
# =============================================================================

@dataclass(frozen=True)
class RunConfig:
    """
    Everything one CLI run needs, flat so that flags and a JSON config file
    can be merged key by key.

    Attributes:
        series (str): Input series file
        events (str, optional): Ground-truth events file
        label_column (str, optional): Binary label column inside the series
            file, used instead of an events file
        out (str): Output directory
        time_column (str): Timestamp column name
        feature_columns (Tuple[str, ...], optional): Feature columns; None
            takes every column except time and label
        w (int): Window size in steps
        hidden_units (int): Q
        activation (str): "sigmoid" or "tanh"
        train_fraction (float): Share of steps in the training region
        epochs, batch_size, learning_rate, optimizer, validation_fraction,
            restore_best: see TrainConfig
        seed (int): Seeds initialization and shuffling
        sigma, radius, threshold (optional): Fixed smoothing/peak settings;
            when sigma and threshold are set tuning is skipped
        sigmas, radii, thresholds: Tuning grid (see TuneGrid)
        tolerance (float, optional): Matching tolerance delta; None means w_s
        scale_inputs (bool): Min-max scale window vectors with the training
            region's statistics
        workers (int, optional): Tuning threads
    """
    series: Optional[str] = None
    events: Optional[str] = None
    label_column: Optional[str] = None
    out: str = "out"
    time_column: str = "time"
    feature_columns: Optional[Tuple[str, ...]] = None
    w: int = 21
    hidden_units: int = 20
    activation: str = "sigmoid"
    train_fraction: float = 0.7
    epochs: int = TrainConfig.epochs
    batch_size: int = TrainConfig.batch_size
    learning_rate: float = TrainConfig.learning_rate
    optimizer: str = TrainConfig.optimizer
    validation_fraction: float = TrainConfig.validation_fraction
    restore_best: bool = TrainConfig.restore_best
    seed: int = 0
    sigma: Optional[float] = None
    radius: Optional[int] = None
    threshold: Optional[float] = None
    sigmas: Tuple[float, ...] = TuneGrid.sigmas
    radii: Optional[Tuple[int, ...]] = None
    thresholds: Tuple[float, ...] = TuneGrid.thresholds
    tolerance: Optional[float] = None
    scale_inputs: bool = True
    workers: Optional[int] = None

    def validate(self) -> None:
        """Validate configuration values."""
        if self.w < 2:
            raise ConfigError(f"w must be >= 2, got {self.w}")
        if self.hidden_units < 1:
            raise ConfigError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if self.activation not in ("sigmoid", "tanh"):
            raise ConfigError(f"activation must be sigmoid or tanh, got {self.activation!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.events and self.label_column:
            raise ConfigError("give either events or label_column, not both")
        if (self.sigma is None) != (self.threshold is None):
            raise ConfigError("fixed smoothing needs both sigma and threshold")
        if self.radius is not None and self.sigma is None:
            raise ConfigError("radius given without sigma")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        self.train_config().validate()
        self.tune_grid().validate()
        fixed = self.fixed_smoothing()
        if fixed is not None:
            fixed[0].validate()

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
            validation_fraction=self.validation_fraction,
            optimizer=self.optimizer,
            restore_best=self.restore_best,
        )

    def tune_grid(self) -> TuneGrid:
        return TuneGrid(sigmas=tuple(self.sigmas), radii=self.radii, thresholds=tuple(self.thresholds))

    def fixed_smoothing(self) -> Optional[Tuple[SmoothingConfig, float]]:
        """(SmoothingConfig, threshold) when fixed settings replace tuning."""
        if self.sigma is None or self.threshold is None:
            return None
        if self.radius is None:
            smoothing = SmoothingConfig.three_sigma(self.sigma)
        else:
            smoothing = SmoothingConfig(sigma=float(self.sigma), radius=int(self.radius))
        return smoothing, float(self.threshold)

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """New config with the given keys replaced; None values are ignored."""
        known = {f.name for f in dataclasses.fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        changes = {key: _coerce(key, value) for key, value in overrides.items() if value is not None}
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready mapping (tuples become lists)."""
        result = {}
        for key, value in dataclasses.asdict(self).items():
            result[key] = list(value) if isinstance(value, tuple) else value
        return result


_TUPLE_FIELDS = {"feature_columns", "sigmas", "radii", "thresholds"}


def _coerce(key: str, value: Any) -> Any:
    # JSON gives lists; the frozen config stores tuples.
    if key in _TUPLE_FIELDS and isinstance(value, (list, tuple)):
        return tuple(value)
    return value


def default_run_config() -> RunConfig:
    """Built-in defaults with the environment overrides applied."""
    return RunConfig(
        epochs=TRAINING.epochs,
        batch_size=TRAINING.batch_size,
        learning_rate=TRAINING.learning_rate,
        optimizer=TRAINING.optimizer,
        validation_fraction=TRAINING.validation_fraction,
        seed=TRAINING.seed,
        workers=WORKERS,
    )


# =============================================================================
# ENVIRONMENT VARIABLE OVERRIDES
# =============================================================================

def load_env_overrides() -> None:
    """
    Load configuration overrides from a .env file and environment variables.

    Supported Environment Variables:
        EVENTDET_LOG_LEVEL: Override logging level
        EVENTDET_SEED: Override the default seed
        EVENTDET_WORKERS: Threads used by tuning
        EVENTDET_EPOCHS: Override the default epoch count

    Example:
        export EVENTDET_LOG_LEVEL="DEBUG"
        export EVENTDET_EPOCHS="200"
    """
    global TRAINING, OBSERVABILITY, WORKERS

    load_dotenv()

    if log_level := os.getenv("EVENTDET_LOG_LEVEL"):
        candidate = dataclasses.replace(OBSERVABILITY, log_level=log_level.upper())
        try:
            candidate.validate()
            OBSERVABILITY = candidate
        except ConfigError as e:
            logger.warning(f"Invalid EVENTDET_LOG_LEVEL: {e}")

    training_changes = {}
    for env_name, key in (("EVENTDET_SEED", "seed"), ("EVENTDET_EPOCHS", "epochs")):
        if raw := os.getenv(env_name):
            try:
                training_changes[key] = int(raw)
            except ValueError:
                logger.warning(f"Invalid {env_name}: {raw!r} is not an integer")
    if training_changes:
        candidate = dataclasses.replace(TRAINING, **training_changes)
        try:
            candidate.validate()
            TRAINING = candidate
        except ConfigError as e:
            logger.warning(f"Ignoring training overrides: {e}")

    if raw := os.getenv("EVENTDET_WORKERS"):
        try:
            workers = int(raw)
            if workers < 1:
                raise ValueError
            WORKERS = workers
        except ValueError:
            logger.warning(f"Invalid EVENTDET_WORKERS: {raw!r}")


# Load environment overrides on import
load_env_overrides()


# =============================================================================
# VALIDATION
# =============================================================================

def validate_all_configs() -> None:
    """
    Validate the module-level default configurations.

    Raises:
        ConfigError: If any configuration is invalid
    """
    configs = [
        ("TrainConfig", TRAINING),
        ("SmoothingConfig", SmoothingConfig()),
        ("TuneGrid", TuneGrid.default()),
        ("SynthConfig", SynthConfig()),
        ("ObservabilityConfig", OBSERVABILITY),
    ]

    for name, config in configs:
        try:
            config.validate()
        except ConfigError as e:
            raise ConfigError(f"{name} validation failed: {e}")


# =============================================================================
# PRESET CONFIGURATIONS
# =============================================================================

def get_fraud_preset() -> Dict[str, Any]:
    """Transaction-level events: w=2 so w_s equals one step."""
    return {"w": 2, "hidden_units": 20, "activation": "sigmoid"}


def get_bow_shock_preset() -> Dict[str, Any]:
    """Boundary crossings sampled every 4 s: w=76 gives w_s = 300 s."""
    return {"w": 76, "hidden_units": 20, "activation": "sigmoid"}


PRESETS = {
    "fraud": get_fraud_preset,
    "bow-shock": get_bow_shock_preset,
}


def get_preset(name: str) -> Dict[str, Any]:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")


# =============================================================================
# CONFIGURATION SUMMARY
# =============================================================================

def print_config_summary(run: Optional[RunConfig] = None) -> None:
    """
    Print a human-readable configuration summary.

    Example:
        >>> print_config_summary()

        ============================================================
        EVENT DETECTION - CONFIGURATION
        ============================================================
        ...
    """
    run = run or default_run_config()
    fixed = run.fixed_smoothing()

    print("\n" + "=" * 60)
    print("EVENT DETECTION - CONFIGURATION")
    print("=" * 60)

    print("\n📄 DATA:")
    print(f"  • Series: {run.series or '-'}")
    print(f"  • Events: {run.events or run.label_column or '-'}")
    print(f"  • Output: {run.out}")
    print(f"  • Train fraction: {run.train_fraction}")

    print("\n🧠 MODEL:")
    print(f"  • Window w: {run.w}")
    print(f"  • Hidden units Q: {run.hidden_units}")
    print(f"  • Activation: {run.activation}")

    print("\n🏋️ TRAINING:")
    print(f"  • Optimizer: {run.optimizer} (lr={run.learning_rate})")
    print(f"  • Epochs: {run.epochs}, batch size {run.batch_size}")
    print(f"  • Validation fraction: {run.validation_fraction}")
    print(f"  • Restore best epoch: {run.restore_best}")
    print(f"  • Seed: {run.seed}")

    print("\n🔍 DETECTION:")
    if fixed is not None:
        print(f"  • Fixed: sigma={fixed[0].sigma}, radius={fixed[0].radius}, h={fixed[1]}")
    else:
        print(f"  • Tuning grid: {len(run.tune_grid())} combination(s)")
    print(f"  • Tolerance: {run.tolerance if run.tolerance is not None else 'w_s'}")
    print(f"  • Workers: {run.workers or 'auto'}")

    print("\n📝 OBSERVABILITY:")
    print(f"  • Log level: {OBSERVABILITY.log_level}")
    print(f"  • Metrics enabled: {OBSERVABILITY.enable_metrics}")

    print("\n" + "=" * 60 + "\n")
