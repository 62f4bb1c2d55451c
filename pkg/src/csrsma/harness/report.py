"""Plot-ready CSV reports built from sweep rows."""
from __future__ import annotations

import csv
import io
from enum import Enum

import numpy as np

from .sweep import SweepRow, summarize

__all__ = ["ReportKind", "report", "SCHEMA_REPORT"]

SCHEMA_REPORT = "csrsma.report/1"


class ReportKind(str, Enum):
    ERGODIC_CURVE = "ergodic_curve"
    STREAM_DECOMPOSITION = "stream_decomposition"
    MODE_BREAKDOWN = "mode_breakdown"

    @classmethod
    def parse(cls, value) -> "ReportKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for v in cls:
            if key in (v.value, v.name.lower()):
                return v
        raise ValueError(f"unknown report kind {value!r}")


def _f(x):
    return repr(float(x))


def _mode_table(rows):
    """Per (SNR, scheme, mode): mean closed-form objective and selection share."""
    groups = {}
    for r in rows:
        groups.setdefault((r.snr_db, r.scheme), []).append(r)
    out = []
    for (snr, scheme), rs in sorted(groups.items()):
        names = [m for m, _ in rs[0].mode_objectives]
        for name in names:
            vals = [dict(r.mode_objectives)[name] for r in rs if r.mode_objectives]
            out.append((snr, scheme, name, float(np.mean(vals)),
                        sum(r.mode_name == name for r in rs) / len(rs), len(rs)))
    return out


def report(rows, kind) -> str:
    """CSV text for one report kind.

    ``ergodic_curve``: mean objective and its standard error per SNR and
    scheme. ``stream_decomposition``: mean common and private rate per SNR
    and scheme; the two columns add up to ``total_bits``, the mean sum of
    user rates. ``mode_breakdown``: per mode, the mean closed-form objective
    the optimizer reached and the fraction of realizations selecting it.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("report needs at least one row")
    if not all(isinstance(r, SweepRow) for r in rows):
        raise TypeError("rows must be SweepRow instances")
    kind = ReportKind.parse(kind)
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA_REPORT};kind={kind.value}\n")
    w = csv.writer(buf, lineterminator="\n")
    if kind is ReportKind.ERGODIC_CURVE:
        w.writerow(("snr_db", "scheme", "mean_bits", "stderr_bits", "n"))
        for s in summarize(rows):
            w.writerow((_f(s["snr_db"]), s["scheme"], _f(s["mean_bits"]), _f(s["stderr_bits"]), s["n"]))
    elif kind is ReportKind.STREAM_DECOMPOSITION:
        w.writerow(("snr_db", "scheme", "common_bits", "private_bits", "total_bits", "n"))
        for s in summarize(rows):
            w.writerow((_f(s["snr_db"]), s["scheme"], _f(s["common_bits"]), _f(s["private_bits"]),
                        _f(s["common_bits"] + s["private_bits"]), s["n"]))
    else:
        w.writerow(("snr_db", "scheme", "mode", "mean_approx_bits", "selected_fraction", "n"))
        for snr, scheme, mode, mean, frac, n in _mode_table(rows):
            w.writerow((_f(snr), scheme, mode, _f(mean), _f(frac), n))
    return buf.getvalue()
