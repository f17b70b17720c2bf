"""JSON plumbing: 6-significant-digit float serialization, canonical dumps,
atomic writes."""

from __future__ import annotations

import json
import math
import os
import tempfile

SIG_DIGITS = 6


def round_sig(x: float, sig: int = SIG_DIGITS) -> float:
    if x == 0.0 or not math.isfinite(x):
        return x
    return float(f"{x:.{sig}g}")


def round_floats(obj, sig: int = SIG_DIGITS):
    """Recursively round every float to `sig` significant digits."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round_sig(obj, sig)
    if isinstance(obj, dict):
        return {k: round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, sig) for v in obj]
    return obj


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def atomic_write(path, text: str) -> None:
    """Write-then-rename so concurrent readers never see partial documents."""
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
