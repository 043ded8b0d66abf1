"""
Detection Pipeline

Orchestrates the stages of a run and exposes them as commands:

    label   -> op_series.csv
    train   -> model.txt, loss_history.csv
    tune    -> tune_table.csv, tune_best.txt
    detect  -> predicted_op.csv, smoothed_series.csv, predicted_events.csv
               (+ truth_test_events.csv, op_comparison.csv with ground truth)
    eval    -> match_report.txt, deltas.csv
    synth   -> series.csv, events.csv

Every stage reads its inputs from the run configuration and the output
directory, so `pipeline` is exactly the composition of the individual
commands over the same intermediate files.

The series is split temporally at step b = floor(train_fraction * N).
Training partitions end before b (i + w - 1 < b), test partitions start at
or after it (i >= b); windows straddling b are dropped. Tuning uses the
validation slice of the training partitions (the rows the trainer held out),
falling back to all training partitions when that slice holds no event.

License: MIT
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from config import RunConfig, SmoothingConfig, SynthConfig
from data.series import (
    AdjustedEventSet,
    EventSet,
    TimeSeries,
    adjust_events,
    labels_to_events,
    load_events,
    load_labels,
    load_series,
    write_events,
    write_series,
)
from data.synthetic import generate, imbalance_ratio
from detection.evaluation import (
    MatchReport,
    match_events,
    peaks_to_events,
    restrict_truth,
    write_deltas,
    write_report,
)
from detection.labeling import OpSeries, op_series, write_op_comparison, write_op_series
from detection.postprocess import detect_peaks, write_smoothed
from detection.tuning import TuneResult, load_best, tune, write_best, write_tune_table
from detection.windowing import MinMaxScaler, WindowMatrix, build_windows, fit_scaler
from model.regressor import Regressor, init, predict_series
from model.serialization import load_model, save_model
from model.trainer import TrainingResult, split_validation, train
from observability import get_logger
from utils.errors import ConfigError, ValidationError
from utils.io import write_table

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ARTIFACTS = {
    "op_series": "op_series.csv",
    "model": "model.txt",
    "loss_history": "loss_history.csv",
    "predicted_op": "predicted_op.csv",
    "smoothed": "smoothed_series.csv",
    "op_comparison": "op_comparison.csv",
    "predicted_events": "predicted_events.csv",
    "truth_test_events": "truth_test_events.csv",
    "tune_table": "tune_table.csv",
    "tune_best": "tune_best.txt",
    "match_report": "match_report.txt",
    "deltas": "deltas.csv",
    "run_config": "run_config.json",
    "metrics": "metrics.json",
    "log": "run.log",
    "synth_series": "series.csv",
    "synth_events": "events.csv",
}


@dataclass(frozen=True)
class Split:
    """
    Partition index ranges of the temporal train/test split.

    Attributes:
        boundary_step (int): b = floor(train_fraction * N)
        n_rows (int): N - w + 1 partitions in total
        n_train (int): training partitions [0, n_train)
        validation_start (int): validation slice [validation_start, n_train)
        test_start (int): test partitions [test_start, n_rows)
    """
    boundary_step: int
    n_rows: int
    n_train: int
    validation_start: int
    test_start: int


def temporal_split(n_steps: int, w: int, train_fraction: float, validation_fraction: float) -> Split:
    """
    Contiguous train/test split with boundary-straddling windows dropped.

    Raises:
        ValidationError: fewer than two training windows, or no test window
    """
    boundary = int(math.floor(train_fraction * n_steps))
    n_rows = n_steps - w + 1
    n_train = max(0, boundary - w + 1)
    if n_train < 2:
        raise ValidationError(
            f"training region (steps < {boundary}) holds {n_train} complete window(s) of w={w}; need >= 2"
        )
    if boundary >= n_rows:
        raise ValidationError(f"test region (steps >= {boundary}) holds no complete window of w={w}")
    return Split(
        boundary_step=boundary,
        n_rows=n_rows,
        n_train=n_train,
        validation_start=split_validation(n_train, validation_fraction),
        test_start=boundary,
    )


def write_run_config(run: RunConfig, path: PathLike) -> Path:
    """Echo the effective configuration for provenance."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(run.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


def write_loss_history(result: TrainingResult, path: PathLike) -> Path:
    frame = pd.DataFrame(
        {
            "epoch": np.arange(1, len(result.train_loss) + 1),
            "train_mse": result.train_loss,
            "validation_mse": result.validation_loss,
        }
    )
    return write_table(path, frame)


class DetectionPipeline:
    """
    Stage runner for one RunConfig.

    Inputs (series, ground truth, windows) are loaded lazily and cached, so
    a single instance can run several stages without re-reading files.

    Example:
        >>> pipeline = DetectionPipeline(RunConfig(series="series.csv", events="events.csv", w=21))
        >>> report = pipeline.run_all()
        >>> print(report.f1)
    """

    def __init__(self, run: RunConfig):
        run.validate()
        self.run = run
        self.out = Path(run.out)
        self.obs = get_logger()
        self._series: Optional[TimeSeries] = None
        self._truth: Optional[AdjustedEventSet] = None
        self._windows: Optional[WindowMatrix] = None

    # -------------------------------------------------------------------------
    # Inputs
    # -------------------------------------------------------------------------

    def path(self, artifact: str) -> Path:
        return self.out / ARTIFACTS[artifact]

    @property
    def has_truth(self) -> bool:
        return bool(self.run.events or self.run.label_column)

    def series(self) -> TimeSeries:
        if self._series is None:
            if not self.run.series:
                raise ConfigError("no series file given (--series)")
            exclude = (self.run.label_column,) if self.run.label_column else ()
            self._series = load_series(
                self.run.series,
                time_column=self.run.time_column,
                feature_columns=self.run.feature_columns,
                exclude_columns=exclude,
            )
        return self._series

    @property
    def w_s(self) -> float:
        return self.series().window_duration(self.run.w)

    @property
    def tolerance(self) -> float:
        return self.run.tolerance if self.run.tolerance is not None else self.w_s

    def truth(self) -> AdjustedEventSet:
        """Ground truth adjusted to duration w_s."""
        if self._truth is None:
            if self.run.events:
                events = load_events(self.run.events)
            elif self.run.label_column:
                labels = load_labels(self.run.series, self.run.label_column)
                events = labels_to_events(self.series(), labels, self.w_s)
            else:
                raise ConfigError("ground truth needed: pass --events or --label-column")
            self._truth = adjust_events(events, self.w_s)
        return self._truth

    def windows(self) -> WindowMatrix:
        if self._windows is None:
            self._windows = build_windows(self.series(), self.run.w)
        return self._windows

    def split(self) -> Split:
        series = self.series()
        split = temporal_split(series.n_steps, self.run.w, self.run.train_fraction, self.run.validation_fraction)
        return split

    def _load_model(self, model_path: Optional[PathLike]) -> Tuple[Regressor, Optional[MinMaxScaler]]:
        return load_model(model_path or self.path("model"))

    def _predict(self, model: Regressor, scaler: Optional[MinMaxScaler], start: int, stop: int) -> OpSeries:
        rows = self.windows().with_scaler(scaler).take(start, stop)
        return predict_series(model, rows)

    # -------------------------------------------------------------------------
    # Stages
    # -------------------------------------------------------------------------

    def label(self) -> OpSeries:
        """Ground-truth op for every partition."""
        with self.obs.stage("label"):
            truth = self.truth()
            labels = op_series(self.series(), truth, self.run.w)
            write_op_series(labels, self.path("op_series"))
            self.obs.log_event(
                "LABEL",
                "Labeled partitions",
                {"partitions": len(labels), "events": len(truth), "w": self.run.w, "w_s": self.w_s},
            )
        return labels

    def train(self) -> TrainingResult:
        """Fit the regressor on the training partitions and save it."""
        with self.obs.stage("train"):
            split = self.split()
            targets = op_series(self.series(), self.truth(), self.run.w).slice(0, split.n_train)
            rows = self.windows().take(0, split.n_train)
            scaler = None
            if self.run.scale_inputs:
                rows = fit_scaler(rows)
                scaler = rows.scaler
            self.obs.log_event(
                "SPLIT",
                "Temporal split",
                {"boundary_step": split.boundary_step, "train_rows": split.n_train,
                 "test_rows": split.n_rows - split.test_start},
            )

            model = init(rows.width, self.run.hidden_units, self.run.activation, seed=self.run.seed)
            result = train(model, rows, targets, self.run.train_config())
            save_model(result.model, self.path("model"), scaler=scaler)
            write_loss_history(result, self.path("loss_history"))

            self.obs.record_value("parameter_count", result.model.parameter_count)
            self.obs.record_value("initial_train_mse", result.initial_train_loss)
            self.obs.record_value("final_train_mse", result.final_train_loss)
            self.obs.record_value("final_validation_mse", result.final_validation_loss)
            self.obs.record_value("best_epoch", result.best_epoch)
        return result

    def tune(self, model_path: Optional[PathLike] = None) -> TuneResult:
        """Grid-search smoothing and threshold on the validation slice."""
        with self.obs.stage("tune"):
            model, scaler = self._load_model(model_path)
            split = self.split()
            truth = self.truth()

            predicted = self._predict(model, scaler, split.validation_start, split.n_train)
            truth_slice = restrict_truth(truth, predicted)
            if len(truth_slice) == 0:
                logger.warning(
                    "⚠️  Validation slice holds no ground-truth event; tuning on the whole training region"
                )
                predicted = self._predict(model, scaler, 0, split.n_train)
                truth_slice = restrict_truth(truth, predicted)

            result = tune(
                predicted, truth_slice, self.run.tune_grid(), self.tolerance, self.w_s, workers=self.run.workers
            )
            write_tune_table(result, self.path("tune_table"))
            write_best(result, self.path("tune_best"))
            self.obs.record_value("tune_best_f1", result.best_f1)
        return result

    def smoothing_settings(self) -> Tuple[SmoothingConfig, float]:
        """Fixed (sigma, radius, h) from the config, else the tuned ones."""
        fixed = self.run.fixed_smoothing()
        if fixed is not None:
            return fixed
        best_path = self.path("tune_best")
        if not best_path.exists():
            raise ConfigError(f"no smoothing settings: pass --sigma and --threshold, or run tune first ({best_path})")
        return load_best(best_path)

    def detect(self, model_path: Optional[PathLike] = None) -> EventSet:
        """Predict, smooth and pick peaks on the test partitions."""
        with self.obs.stage("detect"):
            model, scaler = self._load_model(model_path)
            split = self.split()
            predicted = self._predict(model, scaler, split.test_start, split.n_rows)
            smoothing, threshold = self.smoothing_settings()

            smoothed, peaks = detect_peaks(predicted, smoothing, threshold)
            events = peaks_to_events(peaks, self.w_s)
            write_op_series(predicted, self.path("predicted_op"))
            write_smoothed(smoothed, self.path("smoothed"))
            write_events(events, self.path("predicted_events"))
            self.obs.record_value("predicted_events", len(events))

            if self.has_truth:
                truth = self.truth()
                write_events(restrict_truth(truth, predicted), self.path("truth_test_events"))
                true_op = op_series(self.series(), truth, self.run.w).slice(split.test_start, split.n_rows)
                write_op_comparison(predicted, true_op, self.path("op_comparison"))
                residual = predicted.values - true_op.values
                self.obs.record_value("test_mse", float(np.mean(residual * residual)))

            logger.info(
                f"✓ Detected {len(events)} event(s) (sigma={smoothing.sigma}, radius={smoothing.radius}, h={threshold})"
            )
        return events

    def evaluate(
        self,
        predicted_path: Optional[PathLike] = None,
        truth_path: Optional[PathLike] = None,
    ) -> MatchReport:
        """Match predicted against ground-truth events and write the report."""
        with self.obs.stage("eval"):
            predicted = load_events(predicted_path or self.path("predicted_events"), allow_overlap=True)
            truth = adjust_events(load_events(truth_path or self.path("truth_test_events")), self.w_s)

            report = match_events(predicted, truth, self.tolerance)
            write_report(report, self.path("match_report"))
            write_deltas(report, self.path("deltas"))

            for name in ("precision", "recall", "f1", "delta_mean", "delta_std"):
                self.obs.record_value(name, getattr(report, name))
            logger.info(
                f"✓ TP={report.true_positives} FP={report.false_positives} FN={report.false_negatives} "
                f"precision={report.precision:.4f} recall={report.recall:.4f} f1={report.f1:.4f}"
            )
        return report

    def run_all(self) -> MatchReport:
        """label -> train -> tune (unless fixed) -> detect -> eval."""
        print("\n" + "=" * 60)
        print("📈 EVENT DETECTION PIPELINE")
        print("=" * 60)
        print(f"Series: {self.run.series}")
        print(f"Output: {self.out}")
        print("=" * 60)

        stages = ["label", "train", "tune", "detect", "eval"]
        if self.run.fixed_smoothing() is not None:
            stages.remove("tune")

        report = None
        for number, stage in enumerate(stages, 1):
            self._print_stage_header(number, len(stages), stage)
            if stage == "label":
                self.label()
            elif stage == "train":
                self.train()
            elif stage == "tune":
                self.tune()
            elif stage == "detect":
                self.detect()
            else:
                report = self.evaluate()
        return report

    def _print_stage_header(self, number: int, total: int, name: str) -> None:
        print("\n" + "─" * 60)
        print(f"STAGE {number}/{total}: {name}")
        print("─" * 60)


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_label(run: RunConfig) -> Path:
    DetectionPipeline(run).label()
    return Path(run.out) / ARTIFACTS["op_series"]


def cmd_train(run: RunConfig) -> TrainingResult:
    return DetectionPipeline(run).train()


def cmd_tune(run: RunConfig, model_path: Optional[PathLike] = None) -> TuneResult:
    return DetectionPipeline(run).tune(model_path)


def cmd_detect(run: RunConfig, model_path: Optional[PathLike] = None) -> EventSet:
    return DetectionPipeline(run).detect(model_path)


def cmd_eval(
    run: RunConfig,
    predicted_path: Optional[PathLike] = None,
    truth_path: Optional[PathLike] = None,
) -> MatchReport:
    return DetectionPipeline(run).evaluate(predicted_path, truth_path)


def cmd_pipeline(run: RunConfig) -> MatchReport:
    return DetectionPipeline(run).run_all()


def cmd_synth(config: SynthConfig, out: PathLike) -> Tuple[Path, Path]:
    """Generate a synthetic dataset into out/series.csv and out/events.csv."""
    obs = get_logger()
    out = Path(out)
    with obs.stage("synth"):
        series, events = generate(config)
        series_path = write_series(series, out / ARTIFACTS["synth_series"])
        events_path = write_events(events, out / ARTIFACTS["synth_events"])
        obs.record_value("imbalance_ratio", imbalance_ratio(series, events, config.event_width))
    logger.info(f"💾 Wrote {series_path} and {events_path}")
    return series_path, events_path
