"""File helpers: atomic writes, float formatting, deterministic JSON."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

# 17 significant digits: the decimal text parses back to the same float64 bits.
ROUNDTRIP_FMT = "%.17g"


def fmt_float(value, fmt: str = ROUNDTRIP_FMT) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"refusing to serialize non-finite value {value}")
    return fmt % value


def dumps_json17(obj) -> str:
    """JSON text with floats at 17 significant digits (bit-exact round trip)."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _emit(value, out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file and rename, so interrupted runs leave no partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def run_record_path(output_path) -> Path:
    output_path = Path(output_path)
    return output_path.with_name(output_path.stem + ".run.json")


def write_run_record(output_path, record: dict) -> None:
    """Provenance sidecar for an output file.

    Deliberately contains no timestamps: reruns with identical inputs must
    produce byte-identical records.
    """
    atomic_write_text(run_record_path(output_path), dumps_json17(record) + "\n")
