"""
Single-Hidden-Layer Regressor

A feed-forward network with r inputs, Q hidden units with a squashing
activation, and one linear output:

    f(x) = beta . Psi(W x + b) + c

Parameters (in serialization order): hidden_weights W (Q x r, row-major),
hidden_biases b (Q), output_weights beta (Q), output_bias c. The parameter
count is (r+1)*Q + (Q+1), e.g. 1,201 for r=58, Q=20.

License: MIT
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from detection.labeling import OpSeries
from detection.windowing import WindowMatrix
from utils.errors import DimensionMismatch, NonFiniteValue, ValidationError

logger = logging.getLogger(__name__)

PARAMETER_NAMES = ("hidden_weights", "hidden_biases", "output_weights", "output_bias")


# =============================================================================
# ACTIVATIONS
# =============================================================================

def _sigmoid(z: np.ndarray) -> np.ndarray:
    # tanh form is overflow-free and gives sigmoid(0) == 0.5 exactly
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _sigmoid_prime(z: np.ndarray) -> np.ndarray:
    s = _sigmoid(z)
    return s * (1.0 - s)


def _tanh_prime(z: np.ndarray) -> np.ndarray:
    t = np.tanh(z)
    return 1.0 - t * t


ACTIVATIONS: Dict[str, Tuple[Callable, Callable]] = {
    "sigmoid": (_sigmoid, _sigmoid_prime),
    "tanh": (np.tanh, _tanh_prime),
}

# sup |Psi'| per activation, used for Lipschitz bounds.
ACTIVATION_SLOPE = {"sigmoid": 0.25, "tanh": 1.0}


def parameter_count(input_dim: int, hidden_units: int) -> int:
    """(r+1)*Q + (Q+1)"""
    return (input_dim + 1) * hidden_units + (hidden_units + 1)


@dataclass
class Regressor:
    """
    Network in the class of single-hidden-layer squashing networks, plus an
    output bias.

    Attributes:
        input_dim (int): r
        hidden_units (int): Q
        hidden_weights (np.ndarray): Q x r
        hidden_biases (np.ndarray): Q
        output_weights (np.ndarray): Q
        output_bias (float): c
        activation (str): "sigmoid" or "tanh"
    """
    input_dim: int
    hidden_units: int
    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_bias: float
    activation: str = "sigmoid"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValidationError(
                f"activation must be one of {sorted(ACTIVATIONS)}, got {self.activation!r}"
            )
        self.hidden_weights = np.asarray(self.hidden_weights, dtype=np.float64)
        self.hidden_biases = np.asarray(self.hidden_biases, dtype=np.float64).reshape(-1)
        self.output_weights = np.asarray(self.output_weights, dtype=np.float64).reshape(-1)
        self.output_bias = float(self.output_bias)
        expected = (self.hidden_units, self.input_dim)
        if self.hidden_weights.shape != expected:
            raise DimensionMismatch(f"hidden_weights shape {self.hidden_weights.shape} != {expected}")
        if self.hidden_biases.size != self.hidden_units or self.output_weights.size != self.hidden_units:
            raise DimensionMismatch("bias/output vectors must have Q entries")

    @property
    def parameter_count(self) -> int:
        return parameter_count(self.input_dim, self.hidden_units)

    @property
    def psi(self) -> Callable:
        return ACTIVATIONS[self.activation][0]

    @property
    def psi_prime(self) -> Callable:
        return ACTIVATIONS[self.activation][1]

    def parameters(self) -> Dict[str, np.ndarray]:
        """Parameter arrays keyed in serialization order (views, not copies)."""
        return {
            "hidden_weights": self.hidden_weights,
            "hidden_biases": self.hidden_biases,
            "output_weights": self.output_weights,
            "output_bias": np.array([self.output_bias]),
        }

    def flat_parameters(self) -> np.ndarray:
        return np.concatenate([self.parameters()[name].ravel() for name in PARAMETER_NAMES])

    def with_flat_parameters(self, flat: np.ndarray) -> "Regressor":
        """New model with parameters taken from a flat vector in serialization order."""
        flat = np.asarray(flat, dtype=np.float64).reshape(-1)
        if flat.size != self.parameter_count:
            raise DimensionMismatch(f"{flat.size} values for {self.parameter_count} parameters")
        q, r = self.hidden_units, self.input_dim
        cut = np.cumsum([q * r, q, q])
        return Regressor(
            input_dim=r,
            hidden_units=q,
            hidden_weights=flat[: cut[0]].reshape(q, r).copy(),
            hidden_biases=flat[cut[0]: cut[1]].copy(),
            output_weights=flat[cut[1]: cut[2]].copy(),
            output_bias=float(flat[cut[2]]),
            activation=self.activation,
        )

    def apply_update(self, updates: Dict[str, np.ndarray]) -> None:
        """In-place parameter -= update, keyed like parameters()."""
        self.hidden_weights -= updates["hidden_weights"]
        self.hidden_biases -= updates["hidden_biases"]
        self.output_weights -= updates["output_weights"]
        self.output_bias -= float(updates["output_bias"][0])

    def copy(self) -> "Regressor":
        return Regressor(
            input_dim=self.input_dim,
            hidden_units=self.hidden_units,
            hidden_weights=self.hidden_weights.copy(),
            hidden_biases=self.hidden_biases.copy(),
            output_weights=self.output_weights.copy(),
            output_bias=self.output_bias,
            activation=self.activation,
        )

    def lipschitz_bound(self) -> float:
        """Upper bound on |f(x) - f(y)| / ||x - y||_2: sum_j |beta_j| ||w_j|| sup|Psi'|."""
        row_norms = np.linalg.norm(self.hidden_weights, axis=1)
        return float(np.sum(np.abs(self.output_weights) * row_norms) * ACTIVATION_SLOPE[self.activation])

    # -------------------------------------------------------------------------
    # Forward / backward
    # -------------------------------------------------------------------------

    def _check_inputs(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.input_dim:
            raise DimensionMismatch(f"model expects r={self.input_dim} inputs, got {X.shape[1]}")
        return X

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Batch forward pass; one output per row."""
        X = self._check_inputs(X)
        hidden = self.psi(X @ self.hidden_weights.T + self.hidden_biases)
        return hidden @ self.output_weights + self.output_bias

    def loss_and_gradients(self, X: np.ndarray, y: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
        """
        Mean squared error over the batch and its gradients.

        Returns:
            (mse, grads) with grads keyed like parameters()
        """
        X = self._check_inputs(X)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if y.size != X.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} input rows for {y.size} targets")

        z = X @ self.hidden_weights.T + self.hidden_biases
        hidden = self.psi(z)
        output = hidden @ self.output_weights + self.output_bias
        residual = output - y
        mse = float(np.mean(residual * residual))

        d_output = 2.0 * residual / y.size
        d_z = np.outer(d_output, self.output_weights) * self.psi_prime(z)
        grads = {
            "hidden_weights": d_z.T @ X,
            "hidden_biases": d_z.sum(axis=0),
            "output_weights": hidden.T @ d_output,
            "output_bias": np.array([d_output.sum()]),
        }
        return mse, grads


# =============================================================================
# OPERATIONS
# =============================================================================

def init(input_dim: int, hidden_units: int, activation: str = "sigmoid", seed: int = 0) -> Regressor:
    """
    Glorot-uniform weights per layer, zero biases, deterministic under seed.

    Example:
        >>> init(58, 20).parameter_count
        1201
    """
    if input_dim < 1 or hidden_units < 1:
        raise ValidationError(f"need r >= 1 and Q >= 1, got r={input_dim}, Q={hidden_units}")
    rng = np.random.default_rng(seed)
    hidden_limit = np.sqrt(6.0 / (input_dim + hidden_units))
    output_limit = np.sqrt(6.0 / (hidden_units + 1))
    model = Regressor(
        input_dim=input_dim,
        hidden_units=hidden_units,
        hidden_weights=rng.uniform(-hidden_limit, hidden_limit, size=(hidden_units, input_dim)),
        hidden_biases=np.zeros(hidden_units),
        output_weights=rng.uniform(-output_limit, output_limit, size=hidden_units),
        output_bias=0.0,
        activation=activation,
    )
    logger.info(
        f"Initialized regressor r={input_dim}, Q={hidden_units}, {activation}: "
        f"{model.parameter_count} parameters"
    )
    return model


def forward(model: Regressor, x: np.ndarray) -> float:
    """f(x) for a single r-vector."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != model.input_dim:
        raise DimensionMismatch(f"model expects r={model.input_dim} inputs, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("input vector contains non-finite values")
    return float(model.predict(x.reshape(1, -1))[0])


def gradient_check(model: Regressor, x: np.ndarray, target: float, step: float = 1e-6) -> float:
    """
    Compare analytic MSE gradients with central finite differences.

    Each parameter theta is perturbed by h = step * max(1, |theta|). The
    relative error per parameter is |a - n| / max(|a|, |n|, 1e-5); the floor
    keeps gradients that vanish up to rounding from dominating.

    Returns:
        float: largest relative error over all parameters
    """
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    y = np.array([float(target)])
    _, grads = model.loss_and_gradients(x, y)
    analytic = np.concatenate([grads[name].ravel() for name in PARAMETER_NAMES])

    theta = model.flat_parameters()
    worst = 0.0
    for k in range(theta.size):
        h = step * max(1.0, abs(theta[k]))
        shifted = theta.copy()
        shifted[k] = theta[k] + h
        loss_plus, _ = model.with_flat_parameters(shifted).loss_and_gradients(x, y)
        shifted[k] = theta[k] - h
        loss_minus, _ = model.with_flat_parameters(shifted).loss_and_gradients(x, y)

        numeric = (loss_plus - loss_minus) / (2.0 * h)
        error = abs(analytic[k] - numeric) / max(abs(analytic[k]), abs(numeric), 1e-5)
        worst = max(worst, error)
    return worst


def evaluate_mse(model: Regressor, X: np.ndarray, y: np.ndarray) -> float:
    """Empirical error: mean squared error of f over the given rows."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size == 0:
        return float("nan")
    residual = model.predict(X) - y
    return float(np.mean(residual * residual))


def predict_series(model: Regressor, windows: WindowMatrix) -> OpSeries:
    """
    One raw prediction per window row, on the rows' partition start times.

    Values are not clipped to [0, 1]; post-processing handles the range.

    Raises:
        DimensionMismatch: window width r differs from the model input_dim
    """
    if windows.width != model.input_dim:
        raise DimensionMismatch(f"window width r={windows.width} != model input_dim {model.input_dim}")
    values = model.predict(windows.features()) if len(windows) else np.empty(0)
    return OpSeries(
        values=values,
        partition_start_times=windows.partition_start_times,
        w=windows.w,
        w_s=windows.w_s,
    )
