"""Number formatting and JSON encoding shared by the CLI and the sweep writer.

All floats are written with 12 significant digits. Complex numbers become
``{"re": .., "im": ..}`` in JSON and ``re+imj`` in CSV cells; non-finite
floats become ``null`` in JSON.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from typing import Any, Iterable

import numpy as np

SCHEMA_VERSION = 1
DIGITS = 12


def fmt(x: Any) -> str:
    """CSV cell text for a scalar."""
    if x is None:
        return ""
    if isinstance(x, bool | np.bool_):
        return "true" if x else "false"
    if isinstance(x, enum.Enum):
        return str(x.value)
    if isinstance(x, int | np.integer):
        return str(int(x))
    if isinstance(x, complex | np.complexfloating):
        z = complex(x)
        return f"{fmt(z.real)}{'-' if math.copysign(1.0, z.imag) < 0 else '+'}{fmt(abs(z.imag))}j"
    if isinstance(x, float | np.floating):
        x = float(x)
        if x == 0.0:
            return "0"
        return f"{x:.{DIGITS}g}"
    return str(x)


def fmt_list(xs: Iterable[Any]) -> str:
    return ";".join(fmt(x) for x in xs)


def _round(x: float) -> float | None:
    if not math.isfinite(x):
        return None
    return 0.0 if x == 0.0 else float(f"{x:.{DIGITS}g}")


def jsonable(obj: Any) -> Any:
    """Recursively convert reports into JSON-compatible values."""
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, bool | np.bool_):
        return bool(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, int | np.integer):
        return int(obj)
    if isinstance(obj, float | np.floating):
        return _round(float(obj))
    if isinstance(obj, complex | np.complexfloating):
        z = complex(obj)
        return {"re": _round(z.real), "im": _round(z.imag)}
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k.value if isinstance(k, enum.Enum) else k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list | tuple):
        return [jsonable(x) for x in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Deterministic JSON text (indented, trailing newline)."""
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def csv_text(columns: list[str], rows: Iterable[Iterable[Any]]) -> str:
    lines = [",".join(columns)]
    lines += [",".join(fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"
