"""
Model file format.

Plain key=value text, one key per line:

    format=1
    input_dim=<r>
    hidden_units=<Q>
    activation=<sigmoid|tanh>
    hidden_weights=<Q*r floats, row-major, comma-separated>
    hidden_biases=<Q floats>
    output_weights=<Q floats>
    output_bias=<1 float>
    scaler_min=<r floats>        (optional)
    scaler_max=<r floats>        (optional)

Floats are written with repr(), which round-trips float64 exactly, so a
saved and reloaded model is bit-identical and two saves of the same model
are byte-identical.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from detection.windowing import MinMaxScaler
from model.regressor import PARAMETER_NAMES, Regressor
from utils.errors import DimensionMismatch, ModelFormatError, ValidationError
from utils.io import read_key_values, write_key_values

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"


def _encode(values: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in np.asarray(values, dtype=np.float64).ravel())


def _decode(raw: Dict[str, str], key: str, expected: int) -> np.ndarray:
    if key not in raw:
        raise ModelFormatError(f"missing key {key!r}")
    try:
        values = np.array([float(token) for token in raw[key].split(",") if token.strip()], dtype=np.float64)
    except ValueError as e:
        raise ModelFormatError(f"{key}: {e}")
    if values.size != expected:
        raise ModelFormatError(f"{key}: expected {expected} values, found {values.size}")
    return values


def save_model(
    model: Regressor,
    path: Union[str, Path],
    scaler: Optional[MinMaxScaler] = None,
) -> Path:
    """
    Write the model (and the input scaler it was trained with, if any).

    Raises:
        DimensionMismatch: scaler width differs from the model input_dim
    """
    if scaler is not None and scaler.width != model.input_dim:
        raise DimensionMismatch(f"scaler width {scaler.width} != model input_dim {model.input_dim}")

    entries = {
        "format": FORMAT_VERSION,
        "input_dim": model.input_dim,
        "hidden_units": model.hidden_units,
        "activation": model.activation,
    }
    parameters = model.parameters()
    for name in PARAMETER_NAMES:
        entries[name] = _encode(parameters[name])
    if scaler is not None:
        entries["scaler_min"] = _encode(scaler.mins)
        entries["scaler_max"] = _encode(scaler.maxs)

    path = write_key_values(path, entries)
    logger.info(f"💾 Saved model ({model.parameter_count} parameters) to {path}")
    return path


def load_model(path: Union[str, Path]) -> Tuple[Regressor, Optional[MinMaxScaler]]:
    """
    Read a model file written by save_model().

    Returns:
        (Regressor, MinMaxScaler or None)

    Raises:
        FileNotFoundError: path does not exist
        ModelFormatError: malformed or inconsistent contents
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        raw = read_key_values(path)
    except ValueError as e:
        raise ModelFormatError(str(e))

    if raw.get("format") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format {raw.get('format')!r}")
    try:
        r = int(raw["input_dim"])
        q = int(raw["hidden_units"])
        activation = raw["activation"]
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"{path}: bad header ({e})")
    if r < 1 or q < 1:
        raise ModelFormatError(f"{path}: dimensions must be positive, got r={r}, Q={q}")

    try:
        model = Regressor(
            input_dim=r,
            hidden_units=q,
            hidden_weights=_decode(raw, "hidden_weights", q * r).reshape(q, r),
            hidden_biases=_decode(raw, "hidden_biases", q),
            output_weights=_decode(raw, "output_weights", q),
            output_bias=float(_decode(raw, "output_bias", 1)[0]),
            activation=activation,
        )
    except ModelFormatError:
        raise
    except ValidationError as e:
        raise ModelFormatError(f"{path}: {e}")

    scaler = None
    has_min, has_max = "scaler_min" in raw, "scaler_max" in raw
    if has_min != has_max:
        raise ModelFormatError(f"{path}: scaler_min and scaler_max must appear together")
    if has_min:
        scaler = MinMaxScaler(mins=_decode(raw, "scaler_min", r), maxs=_decode(raw, "scaler_max", r))

    logger.info(f"Loaded model r={r}, Q={q}, {activation} from {path}")
    return model, scaler
