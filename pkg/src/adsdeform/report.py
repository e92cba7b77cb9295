"""Deterministic JSON/CSV emission. Complex numbers are written as [re, im]."""

from __future__ import annotations

import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _num(x)
    return x


def _num(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def envelope(config, payload: dict) -> dict:
    return {
        "version": __version__,
        "config_hash": config.hash(),
        "config": {k: v for k, v in config.to_dict().items() if k != "out"},
        "tolerances": config.tolerances,
        **payload,
    }


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=1) + "\n"


def csv_text(config, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# version={__version__}\n")
    buf.write(f"# config_hash={config.hash()}\n")
    buf.write("# tolerances=" + json.dumps(config.tolerances, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def emit(text: str, path: str | None):
    """Write to ``path`` or stdout. OSError propagates (mapped to exit 4)."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
