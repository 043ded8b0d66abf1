"""
Artifact I/O helpers.

Delimited tables go through pandas; small reports use key=value lines.
Floats are written with repr() so every artifact round-trips bit-exactly and
is byte-identical across runs with the same inputs.
"""

from pathlib import Path
from typing import Any, Dict, Mapping, Union

import pandas as pd

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """Render a scalar for a key=value line."""
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_key_values(path: PathLike, values: Mapping[str, Any]) -> Path:
    """Write an ordered mapping as key=value lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={format_value(value)}" for key, value in values.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_key_values(path: PathLike) -> Dict[str, str]:
    """Parse key=value lines; blank lines and '#' comments are skipped."""
    result: Dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed line in {path}: {raw!r}")
        result[key.strip()] = value.strip()
    return result


def write_table(path: PathLike, frame: pd.DataFrame) -> Path:
    """Write a DataFrame as comma-delimited text without the index."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=None, lineterminator="\n")
    return path
