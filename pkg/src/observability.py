"""
Observability Module

Logging setup and run metrics for the detection pipeline: per-stage timings
and success/failure counts, structured events, and recorded result values
(losses, scores), written as metrics.json next to the run's artifacts.

Metrics carry wall-clock timestamps, so they are kept out of the
deterministic artifacts (model file, tune table, match report).

License: MIT
"""

import json
import logging
import time
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from threading import Lock
from typing import Any, Dict, Iterator, Optional

import config

logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None, log_file: Optional[Path] = None) -> None:
    """
    Set up console logging and, when log_file is given, a file handler.

    Args:
        level (str, optional): Logging level; defaults to OBSERVABILITY.log_level
        log_file (Path, optional): Detailed log destination (appended)

    Configuration:
        - Console: short format ("INFO message")
        - File: timestamped format, parent directory created on demand
        - Existing root handlers are replaced, so repeated calls do not
          duplicate output
    """
    settings = config.OBSERVABILITY
    numeric_level = getattr(logging, (level or settings.log_level).upper(), logging.INFO)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(numeric_level)

    if settings.enable_console_output:
        console_handler = logging.StreamHandler()
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(logging.Formatter(settings.console_format))
        root.addHandler(console_handler)

    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(str(log_file), mode="a", encoding="utf-8")
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(logging.Formatter(settings.log_format, datefmt="%Y-%m-%d %H:%M:%S"))
        root.addHandler(file_handler)


class ObservabilityLogger:
    """
    Stage-level metrics for one pipeline run.

    Tracks:
        - timing of each stage (label, train, tune, detect, eval, ...)
        - success/failure counts per stage, with error details
        - structured events (type, message, data)
        - named result values (e.g. final validation MSE, test F1)

    Metrics Structure:
        {
            "session_id": "20240115_143000",
            "session_start": "2024-01-15T14:30:00",
            "session_end": "2024-01-15T14:31:12",
            "stage_calls": {"train": {"success": 1, "failure": 0}},
            "stage_timings": {"train": {"avg": 41.2, "min": 41.2, "max": 41.2, "count": 1}},
            "values": {"final_validation_mse": 0.0031, "test_f1": 1.0},
            "total_errors": 0,
            "errors": [],
            "event_types": {"RUN": 2}
        }

    Example Usage:
        >>> obs = get_logger()
        >>> with obs.stage("train"):
        ...     result = train(model, windows, targets, train_config)
        >>> obs.record_value("final_train_mse", result.final_train_loss)
        >>> obs.save_metrics(out_dir / "metrics.json")

    Thread Safety:
        All public methods take the internal lock.
    """

    RECENT_ERRORS_SAVED = 10

    def __init__(self):
        self._lock = Lock()
        self.metrics = self._empty_metrics()

    @staticmethod
    def _empty_metrics() -> Dict[str, Any]:
        return {
            "stage_calls": {},
            "stage_timings": {},
            "errors": [],
            "events": [],
            "values": {},
            "session_start": datetime.now().isoformat(),
            "session_id": datetime.now().strftime("%Y%m%d_%H%M%S"),
        }

    def start_timer(self, stage: str) -> float:
        """Start timing a stage; pass the result to end_timer()."""
        logger.info(f"▶️  Starting {stage}")
        return time.perf_counter()

    def end_timer(
        self,
        stage: str,
        start_time: float,
        success: bool = True,
        error: Optional[BaseException] = None,
    ) -> float:
        """
        Record the outcome and duration of a stage.

        Returns:
            float: Elapsed seconds
        """
        elapsed = time.perf_counter() - start_time
        with self._lock:
            if success:
                logger.info(f"✅ {stage} completed in {elapsed:.2f}s")
            else:
                logger.error(f"❌ {stage} failed in {elapsed:.2f}s: {type(error).__name__}: {error}")

            calls = self.metrics["stage_calls"].setdefault(stage, {"success": 0, "failure": 0})
            self.metrics["stage_timings"].setdefault(stage, []).append(elapsed)
            if success:
                calls["success"] += 1
            else:
                calls["failure"] += 1
                self.metrics["errors"].append(
                    {
                        "stage": stage,
                        "error": str(error),
                        "error_type": type(error).__name__ if error else "Unknown",
                        "timestamp": datetime.now().isoformat(),
                        "elapsed": elapsed,
                    }
                )
        return elapsed

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time a block as one stage; failures are recorded and re-raised."""
        start = self.start_timer(name)
        try:
            yield
        except BaseException as e:
            self.end_timer(name, start, success=False, error=e)
            raise
        self.end_timer(name, start, success=True)

    def log_event(self, event_type: str, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        """
        Log a structured event.

        Example:
            >>> obs.log_event("SPLIT", "Temporal split", {"boundary_step": 3500})
        """
        with self._lock:
            log_msg = f"[{event_type}] {message}"
            if data:
                log_msg += f" | {json.dumps(data, default=str)}"
            logger.info(log_msg)
            self.metrics["events"].append(
                {"type": event_type, "message": message, "data": data, "timestamp": datetime.now().isoformat()}
            )

    def record_value(self, name: str, value: Any) -> None:
        """Store a named result value (numbers, strings, None)."""
        with self._lock:
            self.metrics["values"][name] = value

    def _calculate_summary(self) -> Dict[str, Any]:
        summary = {
            "session_id": self.metrics["session_id"],
            "session_start": self.metrics["session_start"],
            "session_end": datetime.now().isoformat(),
            "stage_calls": {k: dict(v) for k, v in self.metrics["stage_calls"].items()},
            "stage_timings": {},
            "values": dict(self.metrics["values"]),
            "total_errors": len(self.metrics["errors"]),
            "errors": self.metrics["errors"][-self.RECENT_ERRORS_SAVED:],
            "total_events": len(self.metrics["events"]),
            "event_types": self._count_event_types(),
        }
        for stage, timings in self.metrics["stage_timings"].items():
            if timings:
                summary["stage_timings"][stage] = {
                    "avg": sum(timings) / len(timings),
                    "min": min(timings),
                    "max": max(timings),
                    "total": sum(timings),
                    "count": len(timings),
                }
        return summary

    def _count_event_types(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for event in self.metrics["events"]:
            counts[event["type"]] = counts.get(event["type"], 0) + 1
        return counts

    def save_metrics(self, path: Path) -> bool:
        """
        Write the run summary as JSON.

        Returns:
            bool: True if saved; file system errors are logged, not raised
        """
        target = Path(path)
        if not config.OBSERVABILITY.enable_metrics:
            return False
        with self._lock:
            try:
                target.parent.mkdir(parents=True, exist_ok=True)
                with open(target, "w", encoding="utf-8") as f:
                    json.dump(self._calculate_summary(), f, indent=2, ensure_ascii=False, default=str)
                logger.info(f"✅ Metrics saved to {target}")
                return True
            except OSError as e:
                logger.error(f"❌ Failed to save metrics (file system): {e}")
                return False

    def get_statistics(self) -> Dict[str, Any]:
        """Counts for programmatic access."""
        with self._lock:
            total_success = sum(c["success"] for c in self.metrics["stage_calls"].values())
            total_failure = sum(c["failure"] for c in self.metrics["stage_calls"].values())
            return {
                "session_id": self.metrics["session_id"],
                "total_stage_calls": total_success + total_failure,
                "successful_calls": total_success,
                "failed_calls": total_failure,
                "total_errors": len(self.metrics["errors"]),
                "total_events": len(self.metrics["events"]),
                "stages_run": list(self.metrics["stage_calls"].keys()),
                "values": dict(self.metrics["values"]),
            }

    def print_summary(self) -> None:
        """Print stage timings, recorded values and errors."""
        with self._lock:
            print("\n" + "=" * 60)
            print("📊 RUN SUMMARY")
            print("=" * 60)

            if self.metrics["stage_timings"]:
                print("\n⏱️  Stages:")
                for stage, timings in self.metrics["stage_timings"].items():
                    calls = self.metrics["stage_calls"][stage]
                    icon = "✅" if calls["failure"] == 0 else "❌"
                    print(f"  {icon} {stage}: {sum(timings):.2f}s")

            if self.metrics["values"]:
                print("\n📈 Results:")
                for name, value in self.metrics["values"].items():
                    shown = f"{value:.6g}" if isinstance(value, float) else value
                    print(f"  • {name}: {shown}")

            if self.metrics["errors"]:
                print(f"\n❌ Errors: {len(self.metrics['errors'])} total")
                for i, error in enumerate(self.metrics["errors"][-3:], 1):
                    print(f"  {i}. [{error['error_type']}] {error['stage']}: {error['error'][:70]}")

            print("\n" + "=" * 60)


# Global logger singleton
_global_logger: Optional[ObservabilityLogger] = None
_global_lock = Lock()


def get_logger() -> ObservabilityLogger:
    """Get or create the process-wide ObservabilityLogger."""
    global _global_logger
    with _global_lock:
        if _global_logger is None:
            _global_logger = ObservabilityLogger()
        return _global_logger


def reset_global_logger() -> None:
    """Drop the singleton; the next get_logger() starts fresh."""
    global _global_logger
    with _global_lock:
        _global_logger = None
