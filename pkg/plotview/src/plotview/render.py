"""Rendering of experiment CSV exports to image files.

Consumes exactly two documented CSV schemas and recomputes no mathematics;
every curve drawn here comes from a column of the input file.

figure1 schema
    header ``label,re,im``; one row per point with label ``cue`` (parent
    unitary spectrum) or ``tue`` (truncation spectrum), plus exactly one
    ``circle`` row whose ``re`` field is the dashed reference radius.

expectation schema
    header ``bin_center,count,empirical_mean,expected_mean,ratio,
    bulk_approx,edge_approx,sparse``; one row per radial bin.  Bins with
    ``count = 0`` may carry ``nan`` means and are not drawn as points.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "SchemaError",
    "PlotJob",
    "Figure1Points",
    "ExpectationTable",
    "load_figure1",
    "load_expectation",
    "render",
]

EXPECTATION_HEADER = [
    "bin_center",
    "count",
    "empirical_mean",
    "expected_mean",
    "ratio",
    "bulk_approx",
    "edge_approx",
    "sparse",
]


class SchemaError(ValueError):
    """Input file does not match the documented CSV schema."""

    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(f"row {row}: {message}")


@dataclass(frozen=True)
class PlotJob:
    input_path: str
    kind: str  # "figure1" or "expectation"
    output_image_path: str


@dataclass
class Figure1Points:
    cue: np.ndarray
    tue: np.ndarray
    circle_radius: float


@dataclass
class ExpectationTable:
    rows: list


def _float(value: str, row: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise SchemaError(row, f"column {column!r}: {value!r} is not a number") from None


def load_figure1(path: str) -> Figure1Points:
    cue: list[complex] = []
    tue: list[complex] = []
    radius = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["label", "re", "im"]:
            raise SchemaError(1, f"expected header label,re,im, got {header}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 3:
                raise SchemaError(lineno, f"expected 3 fields, got {len(rec)}")
            label = rec[0]
            re = _float(rec[1], lineno, "re")
            im = _float(rec[2], lineno, "im")
            if label == "cue":
                cue.append(complex(re, im))
            elif label == "tue":
                tue.append(complex(re, im))
            elif label == "circle":
                if radius is not None:
                    raise SchemaError(lineno, "duplicate circle row")
                if not math.isfinite(re) or re >= 1.0:
                    raise SchemaError(lineno, f"circle radius {re} must be finite and < 1")
                radius = re
            else:
                raise SchemaError(lineno, f"unknown label {label!r}")
    if not cue:
        raise SchemaError(2, "no cue points")
    if not tue:
        raise SchemaError(2, "no tue points")
    if radius is None:
        raise SchemaError(2, "missing circle row")
    return Figure1Points(cue=np.array(cue), tue=np.array(tue), circle_radius=radius)


def load_expectation(path: str) -> ExpectationTable:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EXPECTATION_HEADER:
            raise SchemaError(1, f"expected header {','.join(EXPECTATION_HEADER)}, got {header}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(EXPECTATION_HEADER):
                raise SchemaError(lineno, f"expected {len(EXPECTATION_HEADER)} fields, got {len(rec)}")
            row = {
                "bin_center": _float(rec[0], lineno, "bin_center"),
                "count": int(_float(rec[1], lineno, "count")),
                "empirical_mean": _float(rec[2], lineno, "empirical_mean"),
                "expected_mean": _float(rec[3], lineno, "expected_mean"),
                "ratio": _float(rec[4], lineno, "ratio"),
                "bulk_approx": _float(rec[5], lineno, "bulk_approx"),
                "edge_approx": _float(rec[6], lineno, "edge_approx"),
                "sparse": int(_float(rec[7], lineno, "sparse")),
            }
            if not 0.0 <= row["bin_center"] <= 1.0:
                raise SchemaError(lineno, "bin_center outside [0, 1]")
            if row["count"] < 0:
                raise SchemaError(lineno, "negative count")
            rows.append(row)
    if not rows:
        raise SchemaError(2, "no bins")
    return ExpectationTable(rows=rows)


def _render_figure1(points: Figure1Points, out_path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 7))
    theta = np.linspace(0.0, 2.0 * np.pi, 512)
    ax.plot(np.cos(theta), np.sin(theta), color="black", linewidth=1.0)
    if points.circle_radius > 0.0:
        r = points.circle_radius
        ax.plot(r * np.cos(theta), r * np.sin(theta), color="gray",
                linestyle="--", linewidth=0.8)
    ax.scatter(points.cue.real, points.cue.imag, s=6, color="tab:blue",
               label=f"unitary ({points.cue.size})")
    ax.scatter(points.tue.real, points.tue.imag, s=6, color="tab:red",
               label=f"truncation ({points.tue.size})")
    ax.set_aspect("equal")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("eigenvalues: unitary vs rank-one truncation")
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _render_expectation(table: ExpectationTable, out_path: str) -> None:
    rows = table.rows
    centers = np.array([r["bin_center"] for r in rows])
    expected = np.array([r["expected_mean"] for r in rows])
    bulk = np.array([r["bulk_approx"] for r in rows])
    edge = np.array([r["edge_approx"] for r in rows])
    populated = [r for r in rows if r["count"] > 0 and math.isfinite(r["empirical_mean"])]
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(centers, expected, color="black", linewidth=1.2, label="exact expectation")
    ax.plot(centers, bulk, color="tab:green", linestyle="--", linewidth=0.9,
            label="bulk approximation")
    ax.plot(centers, edge, color="tab:purple", linestyle=":", linewidth=0.9,
            label="edge profile")
    if populated:
        xs = [r["bin_center"] for r in populated]
        ys = [r["empirical_mean"] for r in populated]
        dense = [not r["sparse"] for r in populated]
        ax.scatter(xs, ys, s=22, c=["tab:blue" if d else "lightgray" for d in dense],
                   zorder=3, label="binned empirical mean")
    ax.set_xlabel("squared radius")
    ax.set_ylabel("mean diagonal overlap")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.set_title("diagonal overlap: binned Monte Carlo means vs exact curve")
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render(job: PlotJob) -> None:
    """Read the input CSV, validate it, and write the image file."""
    if job.kind == "figure1":
        _render_figure1(load_figure1(job.input_path), job.output_image_path)
    elif job.kind == "expectation":
        _render_expectation(load_expectation(job.input_path), job.output_image_path)
    else:
        raise ValueError(f"unknown plot kind {job.kind!r}")
