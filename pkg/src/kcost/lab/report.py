"""JSON reports and CSV curves.

Reports are serialized with sorted keys so the same config and seed give
byte-identical output apart from the ``timestamp`` field.
"""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys
from datetime import datetime, timezone

import numpy as np

CURVE_HEADER = ("m", "cost", "exact")


def versions() -> dict:
    import scipy
    import sklearn

    from .. import __version__

    return {"kcost": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__, "python": platform.python_version()}


def _plain(obj):
    """Recursively turn numpy values and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def build_report(command: str, config: dict, results: dict, passed: bool, *,
                 timestamp: str | None = None) -> dict:
    return {
        "command": command,
        "config": _plain(config),
        "pass": bool(passed),
        "results": _plain(results),
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(),
        "versions": versions(),
    }


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def emit_report(command: str, config: dict, results: dict, passed: bool, path=None,
                stream=None, *, timestamp: str | None = None) -> dict:
    """Write the report to ``path`` (if given) or ``stream`` (default stdout)."""
    report = build_report(command, config, results, passed, timestamp=timestamp)
    text = dumps(report)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)
    return report


def trial_summary(outcomes) -> dict:
    """Counts for a list of per-trial booleans; an empty list does not pass."""
    outcomes = [bool(o) for o in outcomes]
    return {"trials": len(outcomes), "successes": sum(outcomes),
            "pass": bool(outcomes) and all(outcomes)}


def format_curve(pairs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for m, c, exact in pairs:
        w.writerow([int(m), repr(float(c)), "true" if exact else "false"])
    return buf.getvalue()


def write_curve(path, pairs) -> None:
    with open(path, "w") as fh:
        fh.write(format_curve(pairs))
