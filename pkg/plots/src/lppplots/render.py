"""Figures over experiment CSV summaries.

Every figure is a pure view of one summary file (the CSV that `lpp
summarize` writes): points, error bars, fitted lines, and annotations all
come from values already present in the file. Nothing is re-estimated here;
the slope annotated on a fitted figure is the `slope` column of the
corresponding fit row, verbatim.

Kinds:

- ``small-ball``: log delta vs log(-log p_hat) for small_ball point rows,
  the stretched_exp fit line, and an optional -3/2 reference slope.
- ``one-point``: log delta vs log p_hat for one_point point rows, the power
  fit line, and an optional +1 reference slope.
- ``tw-histogram``: density bars reconstructed from the recorded summary
  quantiles (min, q05, q25, q50, q75, q95, max) of tw_stat rows; bar height
  is probability mass over interval width.
- ``transversal-tail``: log p_hat vs x^3 for transversal_tail point rows.

Axes are labeled with the transformed coordinates, so a straight line on
the figure means the corresponding power or stretched-exponential law holds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import matplotlib as mpl
from matplotlib.figure import Figure


class PlotError(Exception):
    """The figure could not be rendered from the given inputs."""


class MissingColumnError(PlotError):
    """The input CSV lacks a column the figure kind requires."""


class FigureKind(str, Enum):
    SMALL_BALL = "small-ball"
    ONE_POINT = "one-point"
    TW_HISTOGRAM = "tw-histogram"
    TRANSVERSAL_TAIL = "transversal-tail"


@dataclass(frozen=True)
class FigureSpec:
    """One figure: which CSV, which view of it, where the image goes."""

    input_csv: str | Path
    kind: FigureKind
    output: str | Path
    reference: bool = True  # overlay the reference slope where the kind has one


_FORMATS = (".png", ".svg")
_FIGSIZE = (6.4, 4.8)
_DPI = 100

# columns each kind reads, checked against the header before any drawing
_REQUIRED: dict[FigureKind, tuple[str, ...]] = {
    FigureKind.SMALL_BALL: (
        "kind", "experiment", "delta", "p_hat", "ci_lo", "ci_hi",
        "model", "slope", "intercept",
    ),
    FigureKind.ONE_POINT: (
        "kind", "experiment", "delta", "p_hat", "ci_lo", "ci_hi",
        "model", "slope", "intercept",
    ),
    FigureKind.TW_HISTOGRAM: (
        "kind", "experiment", "n", "count", "mean",
        "min", "max", "q05", "q25", "q50", "q75", "q95",
    ),
    FigureKind.TRANSVERSAL_TAIL: (
        "kind", "experiment", "x", "p_hat", "ci_lo", "ci_hi",
    ),
}


def _read_rows(path: Path, kind: FigureKind) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            rows = list(reader)
    except OSError as e:
        raise PlotError(f"cannot read {path}: {e}") from e
    required = _REQUIRED[kind]
    if header is None:
        raise MissingColumnError(
            f"{path} is empty; kind {kind.value!r} requires columns: "
            + ", ".join(required)
        )
    missing = [c for c in required if c not in header]
    if missing:
        raise MissingColumnError(
            f"{path} is missing required column(s): " + ", ".join(missing)
        )
    return rows


def _fnum(row: dict, col: str) -> float | None:
    text = (row.get(col) or "").strip()
    if not text:
        return None
    try:
        return float(text)
    except ValueError:
        raise PlotError(f"column {col!r} holds non-numeric value {text!r}") from None


def _points(rows: list[dict], experiment: str, xcol: str) -> list[tuple]:
    """(x, p_hat, ci_lo, ci_hi) from the point rows of one experiment."""
    out = []
    for row in rows:
        if row.get("kind") != "point" or row.get("experiment") != experiment:
            continue
        x = _fnum(row, xcol)
        p = _fnum(row, "p_hat")
        if x is None or p is None:
            continue
        out.append((x, p, _fnum(row, "ci_lo"), _fnum(row, "ci_hi")))
    if not out:
        raise PlotError(f"no {experiment} point rows with {xcol} and p_hat in the input")
    return sorted(out)


def _fits(rows: list[dict], experiment: str, model: str) -> list[tuple[float, float]]:
    """(slope, intercept) from the fit rows of one experiment and model."""
    found = []
    for row in rows:
        if row.get("kind") != "fit" or row.get("experiment") != experiment:
            continue
        if row.get("model") != model:
            continue
        slope = _fnum(row, "slope")
        intercept = _fnum(row, "intercept")
        if slope is not None and intercept is not None:
            found.append((slope, intercept))
    if not found:
        raise PlotError(f"no {model} fit row for {experiment} in the input")
    return found


def _bar_lengths(y: float, below: float | None, above: float | None) -> tuple[float, float]:
    """Error-bar extents from interval endpoints already in plot coordinates."""
    lo = y - below if below is not None and math.isfinite(below) else 0.0
    hi = above - y if above is not None and math.isfinite(above) else 0.0
    return max(lo, 0.0), max(hi, 0.0)


def _reference_line(ax, xs, ys, slope: float, label: str) -> None:
    # anchored at the centroid of the plotted points; only the slope matters
    cx = sum(xs) / len(xs)
    cy = sum(ys) / len(ys)
    grid = [min(xs), max(xs)]
    ax.plot(grid, [cy + slope * (g - cx) for g in grid], "--", color="gray", label=label)


def _draw_fits(ax, xs, fits: list[tuple[float, float]]) -> None:
    grid = [min(xs), max(xs)]
    for slope, intercept in fits:
        ax.plot(grid, [slope * g + intercept for g in grid],
                "-", label=f"fit, slope = {slope:.3f}")
    ax.text(0.04, 0.04, "\n".join(f"slope = {s:.3f}" for s, _ in fits),
            transform=ax.transAxes, va="bottom")


def _loglog_neg(p: float) -> float:
    # log(-log p), the small-ball plot ordinate; defined for 0 < p < 1
    return math.log(-math.log(p))


def _kind_small_ball(rows: list[dict], ax, reference: bool) -> None:
    xs, ys, lows, highs = [], [], [], []
    for delta, p, lo, hi in _points(rows, "small_ball", "delta"):
        if not 0.0 < p < 1.0:
            continue  # not placeable on this scale; fit rows record the exclusion
        y = _loglog_neg(p)
        below = _loglog_neg(hi) if hi is not None and 0.0 < hi < 1.0 else None
        above = _loglog_neg(lo) if lo is not None and 0.0 < lo < 1.0 else None
        b_lo, b_hi = _bar_lengths(y, below, above)
        xs.append(math.log(delta))
        ys.append(y)
        lows.append(b_lo)
        highs.append(b_hi)
    if not xs:
        raise PlotError("no small_ball rows with 0 < p_hat < 1 in the input")
    ax.errorbar(xs, ys, yerr=[lows, highs], fmt="o", capsize=3, label="estimates")
    _draw_fits(ax, xs, _fits(rows, "small_ball", "stretched_exp"))
    if reference:
        _reference_line(ax, xs, ys, -1.5, "reference slope -3/2")
    ax.set_xlabel("log delta")
    ax.set_ylabel("log(-log p_hat)")
    ax.set_title("small-ball probability scaling")


def _kind_one_point(rows: list[dict], ax, reference: bool) -> None:
    xs, ys, lows, highs = [], [], [], []
    for delta, p, lo, hi in _points(rows, "one_point", "delta"):
        if p <= 0.0:
            continue
        y = math.log(p)
        below = math.log(lo) if lo is not None and lo > 0.0 else None
        above = math.log(hi) if hi is not None and hi > 0.0 else None
        b_lo, b_hi = _bar_lengths(y, below, above)
        xs.append(math.log(delta))
        ys.append(y)
        lows.append(b_lo)
        highs.append(b_hi)
    if not xs:
        raise PlotError("no one_point rows with p_hat > 0 in the input")
    ax.errorbar(xs, ys, yerr=[lows, highs], fmt="o", capsize=3, label="estimates")
    _draw_fits(ax, xs, _fits(rows, "one_point", "power"))
    if reference:
        _reference_line(ax, xs, ys, 1.0, "reference slope 1")
    ax.set_xlabel("log delta")
    ax.set_ylabel("log p_hat")
    ax.set_title("one-point probability scaling")


# probability mass between consecutive recorded quantiles
_QUANT_EDGES = ("min", "q05", "q25", "q50", "q75", "q95", "max")
_QUANT_MASS = (0.05, 0.20, 0.25, 0.25, 0.20, 0.05)


def _kind_tw_histogram(rows: list[dict], ax) -> None:
    drew = False
    for row in rows:
        if row.get("kind") != "point" or row.get("experiment") != "tw_stat":
            continue
        edges = [_fnum(row, c) for c in _QUANT_EDGES]
        mean = _fnum(row, "mean")
        if any(e is None for e in edges) or mean is None:
            continue
        if any(b < a for a, b in zip(edges, edges[1:])):
            raise PlotError("tw_stat quantile columns are not nondecreasing")
        heights = [
            m / (b - a) if b > a else 0.0
            for m, a, b in zip(_QUANT_MASS, edges, edges[1:])
        ]
        label = f"n = {row.get('n') or '?'}, count = {row.get('count') or '?'}"
        art = ax.stairs(heights, edges, fill=True, alpha=0.35, label=label)
        ax.axvline(mean, linestyle="--", linewidth=1.0,
                   color=art.get_facecolor(), alpha=0.9)
        drew = True
    if not drew:
        raise PlotError("no tw_stat point rows with quantile summaries in the input")
    ax.set_xlabel("scaled passage time")
    ax.set_ylabel("density from recorded quantiles")
    ax.set_title("scaled passage time distribution")


def _kind_transversal_tail(rows: list[dict], ax) -> None:
    xs, ys, lows, highs = [], [], [], []
    for x, p, lo, hi in _points(rows, "transversal_tail", "x"):
        if p <= 0.0:
            continue
        y = math.log(p)
        below = math.log(lo) if lo is not None and lo > 0.0 else None
        above = math.log(hi) if hi is not None and hi > 0.0 else None
        b_lo, b_hi = _bar_lengths(y, below, above)
        xs.append(x ** 3)
        ys.append(y)
        lows.append(b_lo)
        highs.append(b_hi)
    if not xs:
        raise PlotError("no transversal_tail rows with p_hat > 0 in the input")
    ax.errorbar(xs, ys, yerr=[lows, highs], fmt="o-", capsize=3, label="estimates")
    ax.set_xlabel("x^3")
    ax.set_ylabel("log p_hat")
    ax.set_title("transversal deviation tail")


def render(spec: FigureSpec) -> Path:
    """Write the figure described by ``spec``; returns the output path."""
    out = Path(spec.output)
    suffix = out.suffix.lower()
    if suffix not in _FORMATS:
        raise PlotError(
            f"unsupported output format {out.suffix!r}; use one of: " + ", ".join(_FORMATS)
        )
    try:
        kind = FigureKind(spec.kind)
    except ValueError:
        raise PlotError(
            f"unknown figure kind {spec.kind!r}; expected one of: "
            + ", ".join(k.value for k in FigureKind)
        ) from None
    rows = _read_rows(Path(spec.input_csv), kind)

    fig = Figure(figsize=_FIGSIZE, dpi=_DPI, layout="constrained")
    ax = fig.subplots()
    if kind is FigureKind.SMALL_BALL:
        _kind_small_ball(rows, ax, spec.reference)
    elif kind is FigureKind.ONE_POINT:
        _kind_one_point(rows, ax, spec.reference)
    elif kind is FigureKind.TW_HISTOGRAM:
        _kind_tw_histogram(rows, ax)
    else:
        _kind_transversal_tail(rows, ax)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()

    out.parent.mkdir(parents=True, exist_ok=True)
    # keep SVG text selectable and ids stable so identical inputs give
    # identical bytes; dropping Date removes the only volatile metadata
    with mpl.rc_context({"svg.fonttype": "none", "svg.hashsalt": "lpp-plots"}):
        fig.savefig(out, metadata={"Date": None} if suffix == ".svg" else None)
    return out
