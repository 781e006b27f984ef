"""Report plumbing: ledger entries, atomic CSV/JSON writers, log-log fits.

Floats are rendered with 17 significant digits so round-tripping is exact
and repeated runs are byte-identical; files are written to a temp file in
the target directory and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass

import numpy as np

__all__ = ["LedgerEntry", "fmt", "write_csv_atomic", "write_json_atomic",
           "loglog_fit"]

_SATURATION_FLOOR = 1e-14


@dataclass(frozen=True)
class LedgerEntry:
    """One checked inequality: a name, a self-describing anchor string for
    the bound, the numerical margin (>= 0 means satisfied), and the verdict.

    Failing entries are data, not errors; only the validation command turns
    them into exit codes.
    """

    name: str
    anchor: str
    margin: float
    passed: bool

    def as_dict(self):
        d = asdict(self)
        d["margin"] = float(self.margin)
        return d


def fmt(x) -> str:
    """Render a value for CSV: floats at 17 significant digits."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv_atomic(path: str, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json_atomic(path: str, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def loglog_fit(x, y):
    """Least-squares slope/intercept of log y against log x.

    Returns (exponent, prefactor, saturated). saturated flags data sitting
    at the floating-point floor (all y below 1e-14), in which case the fit
    is meaningless and exponent/prefactor are nan.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need at least two points to fit")
    if np.all(y < _SATURATION_FLOOR):
        return float("nan"), float("nan"), True
    good = (y > 0) & (x > 0)
    if good.sum() < 2:
        return float("nan"), float("nan"), True
    slope, intercept = np.polyfit(np.log(x[good]), np.log(y[good]), 1)
    return float(slope), float(np.exp(intercept)), False
