"""Deterministic CSV emission and a minimal hand-rolled SVG line plot.

Every CSV row carries the schema version and the configuration hash as its
last two columns.  Floats are written with ``repr`` (shortest round-trip
form), so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["CSV_SCHEMAS", "write_csv", "write_svg_lineplot"]

CSV_SCHEMAS = {
    "validate": ("check_name", "residual", "tol", "pass"),
    "dtn": ("row", "col", "re", "im"),
    "converge": ("n_osc", "grid_n", "h", "metric", "value", "runtime_ms"),
    "graph": ("object", "dim", "principal_angle_max"),
}


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def write_csv(path, kind: str, rows, schema_version: str, config_hash: str) -> Path:
    """Write rows of the given schema; returns the path."""
    header = CSV_SCHEMAS[kind] + ("schema_version", "config_hash")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(CSV_SCHEMAS[kind]):
                raise ValueError(f"row {row!r} does not match schema {kind!r}")
            writer.writerow([_fmt(v) for v in row] + [schema_version, config_hash])
    return path


def write_svg_lineplot(path, series: dict, title: str = "", width=640, height=420) -> Path:
    """Minimal polyline plot of ``{label: [(x, y), ...]}`` on log-log axes
    when all values are positive, linear otherwise.  No plotting dependency.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    margin = 60
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    loglog = all(v > 0 for v in xs) and all(v > 0 for v in ys)
    tx = np.log10 if loglog else (lambda v: np.asarray(v, dtype=float))
    xv, yv = tx(np.asarray(xs, dtype=float)), tx(np.asarray(ys, dtype=float))
    x0, x1 = float(np.min(xv)), float(np.max(xv))
    y0, y1 = float(np.min(yv)), float(np.max(yv))
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(x):
        return margin + (float(tx(np.asarray([x]))[0]) - x0) / (x1 - x0) * (width - 2 * margin)

    def py(y):
        return height - margin - (float(tx(np.asarray([y]))[0]) - y0) / (y1 - y0) * (
            height - 2 * margin
        )

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.0f}" y="24" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{margin}" y1="{height-margin}" x2="{width-margin}" y2="{height-margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height-margin}" stroke="black"/>',
    ]
    for i, (label, pts) in enumerate(sorted(series.items())):
        color = colors[i % len(colors)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width-margin+4}" y="{margin + 16*i}" font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts), encoding="utf-8")
    return path
