"""Canonical JSON emission with reproducible float formatting.

All persisted artifacts (index files, prompt bundles, weight hashes) are
written through :func:`dumps_canonical`, which formats every float with 17
significant digits so that a read-back reproduces the exact double. Key
order is insertion order; callers construct dicts in the documented order.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import NumericError


def fmt_float17(x: float) -> str:
    """Format a finite float with 17 significant digits (round-trip exact)."""
    x = float(x)
    if not math.isfinite(x):
        raise NumericError(f"cannot serialize non-finite value {x!r}")
    s = f"{x:.17g}"
    # Bare integers (including '-0') must stay floats on read-back.
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def dumps_canonical(obj: Any) -> str:
    """Serialize to compact JSON with deterministic float text."""
    parts: list[str] = []
    _emit(obj, parts)
    return "".join(parts)


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float17(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be str, got {type(k).__name__}")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(":")
            _emit(v, out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} canonically")
