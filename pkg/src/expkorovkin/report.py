"""CSV tables and SVG convergence plots."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .korovkin import ErrorTable, RateReport  # noqa: E402

__all__ = [
    "ERROR_HEADER",
    "RATE_HEADER",
    "format_float",
    "error_csv_text",
    "write_error_csv",
    "read_error_csv",
    "rate_csv_text",
    "write_rate_csv",
    "plot_errors_svg",
]

ERROR_HEADER = ["parameter", "function", "sup_error", "verdict"]
RATE_HEADER = ["parameter", "delta", "modulus", "bound", "error", "candidate", "ratio"]


def format_float(v: float) -> str:
    # 17 significant digits round-trip every double
    return "%.17g" % float(v)


def _to_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def error_csv_text(table: ErrorTable) -> str:
    rows = []
    for i, p in enumerate(table.parameters):
        for j, lab in enumerate(table.labels):
            rows.append([format_float(p), lab, format_float(table.errors[i, j]),
                         table.verdicts[lab]])
    return _to_text(ERROR_HEADER, rows)


def write_error_csv(table: ErrorTable, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(error_csv_text(table))
    return path


def read_error_csv(path) -> ErrorTable:
    """Parse a CSV written by :func:`write_error_csv` back into a table."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ERROR_HEADER:
            raise ValueError(f"unexpected header {header}")
        params: list[float] = []
        labels: list[str] = []
        cells: dict[tuple[float, str], float] = {}
        verdicts: dict[str, str] = {}
        for row in reader:
            p, lab, err, verdict = row
            p = float(p)
            if p not in params:
                params.append(p)
            if lab not in labels:
                labels.append(lab)
            cells[(p, lab)] = float(err)
            verdicts[lab] = verdict
    errors = np.array([[cells[(p, lab)] for lab in labels] for p in params])
    return ErrorTable(params, labels, errors, verdicts)


def rate_csv_text(report: RateReport) -> str:
    rows = []
    for i, p in enumerate(report.parameters):
        for label, ratios in report.ratios.items():
            rows.append([format_float(p), format_float(report.delta[i]),
                         format_float(report.modulus[i]), format_float(report.bound[i]),
                         format_float(report.error[i]), label, format_float(ratios[i])])
    return _to_text(RATE_HEADER, rows)


def write_rate_csv(report: RateReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rate_csv_text(report))
    return path


def _x_axis(table: ErrorTable) -> tuple[np.ndarray, str]:
    p = np.asarray(table.parameters, dtype=float)
    name = table.parameter_name
    if math.isfinite(table.radius):
        return -np.log10(table.radius - p), f"-log10(R - {name})"
    if name == "m":
        return p, "m"
    with np.errstate(divide="ignore"):
        return np.log10(p), f"log10({name})"


def plot_errors_svg(table: ErrorTable, path, title: str | None = None) -> Path:
    """log10 sup error against the schedule, one line per test function."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x, xlabel = _x_axis(table)
    with plt.rc_context({"svg.fonttype": "none", "svg.hashsalt": "expkorovkin"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for j, lab in enumerate(table.labels):
            e = table.errors[:, j]
            ok = np.isfinite(e) & np.isfinite(x)
            # exact zeros are drawn at the double-precision floor
            y = np.log10(np.maximum(e[ok], 1e-17))
            ax.plot(x[ok], y, marker="o", ms=3, lw=1.2, label=lab)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("log10 sup error")
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
