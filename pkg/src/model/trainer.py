"""
Regressor Training

Mini-batch minimization of the empirical squared error
eps(f) = mean over training rows of (f(v_i) - op(p_i))^2.

The training rows are split temporally: the last validation_fraction of
them is held out for validation loss so that overlapping windows never leak
across the split. Shuffling inside the remaining rows follows a permutation
stream drawn from the seed, so identical inputs give identical weights and
loss histories.

With restore_best (the default) the returned weights are those of the epoch
with the lowest validation MSE; the loss history still covers every epoch.

License: MIT
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from config import TrainConfig
from detection.labeling import OpSeries
from detection.windowing import WindowMatrix
from model.regressor import PARAMETER_NAMES, Regressor, evaluate_mse
from utils.errors import DimensionMismatch, NonFiniteLoss, ValidationError

logger = logging.getLogger(__name__)


# =============================================================================
# OPTIMIZERS
# =============================================================================

class SGD:
    """Plain gradient descent: update = lr * grad."""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        return {name: self.learning_rate * grads[name] for name in PARAMETER_NAMES}


class Adam:
    """
    Adam with bias-corrected first and second moment estimates.

    Args:
        learning_rate (float): Step size
        beta1 (float): First moment decay
        beta2 (float): Second moment decay
        eps (float): Denominator floor
    """

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: Dict[str, np.ndarray] = {}
        self._v: Dict[str, np.ndarray] = {}

    def step(self, grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        self.t += 1
        updates = {}
        for name in PARAMETER_NAMES:
            g = grads[name]
            m = self._m.get(name, np.zeros_like(g))
            v = self._v.get(name, np.zeros_like(g))
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * g * g
            self._m[name], self._v[name] = m, v

            m_hat = m / (1.0 - self.beta1 ** self.t)
            v_hat = v / (1.0 - self.beta2 ** self.t)
            updates[name] = self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
        return updates


def make_optimizer(config: TrainConfig):
    if config.optimizer == "sgd":
        return SGD(config.learning_rate)
    return Adam(config.learning_rate)


# =============================================================================
# TRAINING
# =============================================================================

@dataclass
class TrainingResult:
    """
    Outcome of one training run.

    Attributes:
        model (Regressor): Trained copy; the input model is left untouched
        train_loss (List[float]): Full training-rows MSE after each epoch
        validation_loss (List[float]): Validation-rows MSE after each epoch
        initial_train_loss (float): Training MSE before the first update
        n_train_rows (int): Rows used for gradient steps
        n_validation_rows (int): Held-out rows
        best_epoch (int): Epoch whose weights were returned (1-based)
    """
    model: Regressor
    train_loss: List[float] = field(default_factory=list)
    validation_loss: List[float] = field(default_factory=list)
    initial_train_loss: float = float("nan")
    n_train_rows: int = 0
    n_validation_rows: int = 0
    best_epoch: int = 0

    @property
    def final_train_loss(self) -> Optional[float]:
        return self.train_loss[-1] if self.train_loss else None

    @property
    def final_validation_loss(self) -> Optional[float]:
        return self.validation_loss[-1] if self.validation_loss else None


def split_validation(n_rows: int, validation_fraction: float) -> int:
    """Index where the temporally last validation rows begin."""
    if n_rows < 2:
        raise ValidationError(f"need at least 2 training rows to hold out validation, got {n_rows}")
    n_validation = min(n_rows - 1, max(1, int(n_rows * validation_fraction)))
    return n_rows - n_validation


def train(model: Regressor, windows: WindowMatrix, targets: OpSeries, config: TrainConfig) -> TrainingResult:
    """
    Fit the regressor to (window vector, op) pairs.

    Args:
        model (Regressor): Starting point, typically from init()
        windows (WindowMatrix): Training rows (scaled when a scaler is attached)
        targets (OpSeries): One op value per row
        config (TrainConfig): Hyperparameters

    Returns:
        TrainingResult: trained model and per-epoch losses

    Raises:
        ConfigError: invalid config (epochs=0 etc.)
        DimensionMismatch: row count differs from target count, or window
            width differs from the model input_dim
        NonFiniteLoss: loss became NaN or infinite
    """
    config.validate()
    if len(windows) != len(targets):
        raise DimensionMismatch(f"{len(windows)} window rows for {len(targets)} targets")
    if windows.width != model.input_dim:
        raise DimensionMismatch(f"window width r={windows.width} != model input_dim {model.input_dim}")

    X = windows.features()
    y = targets.values
    boundary = split_validation(len(windows), config.validation_fraction)
    X_train, y_train = X[:boundary], y[:boundary]
    X_val, y_val = X[boundary:], y[boundary:]

    model = model.copy()
    optimizer = make_optimizer(config)
    rng = np.random.default_rng(config.seed)

    result = TrainingResult(
        model=model,
        initial_train_loss=evaluate_mse(model, X_train, y_train),
        n_train_rows=boundary,
        n_validation_rows=len(windows) - boundary,
    )
    logger.info(
        f"Training {model.parameter_count} parameters on {boundary} row(s), "
        f"validating on {result.n_validation_rows} ({config.optimizer}, lr={config.learning_rate}, "
        f"batch={config.batch_size}, epochs={config.epochs})"
    )

    best_loss = np.inf
    best_model = model

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(boundary)
        for start in range(0, boundary, config.batch_size):
            batch = order[start: start + config.batch_size]
            loss, grads = model.loss_and_gradients(X_train[batch], y_train[batch])
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch, loss)
            model.apply_update(optimizer.step(grads))

        train_loss = evaluate_mse(model, X_train, y_train)
        validation_loss = evaluate_mse(model, X_val, y_val)
        if not (np.isfinite(train_loss) and np.isfinite(validation_loss)):
            raise NonFiniteLoss(epoch, train_loss if not np.isfinite(train_loss) else validation_loss)
        result.train_loss.append(train_loss)
        result.validation_loss.append(validation_loss)
        if validation_loss < best_loss or not config.restore_best:
            best_loss = validation_loss
            best_model = model.copy() if config.restore_best else model
            result.best_epoch = epoch

        if epoch == 1 or epoch % 50 == 0 or epoch == config.epochs:
            logger.debug(f"epoch {epoch}: train_mse={train_loss:.6g}, validation_mse={validation_loss:.6g}")

    result.model = best_model
    logger.info(
        f"✓ Training finished: train MSE {result.initial_train_loss:.6g} -> {result.final_train_loss:.6g}, "
        f"validation MSE {result.final_validation_loss:.6g}, weights from epoch {result.best_epoch}"
    )
    return result
