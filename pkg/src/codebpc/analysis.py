"""Fits the two competing relationship hypotheses between compression and score.

The log-linear hypothesis fits a straight line to (bpc, ln score); the
linear hypothesis fits (bpc, score) directly.  Both are compared on the
same points by root-mean-square error in score space so the back
transform of the log model is penalized fairly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, OutputError

LOG_LINEAR = "log-linear"
LINEAR = "linear"


@dataclass(frozen=True)
class ObservationPoint:
    """(model, bpc, composite score) with optional slice labels."""

    model_name: str
    bpc: float
    score: float
    log_score: float = None  # type: ignore[assignment]  # derived when omitted
    slices: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.score <= 0:
            raise InputError(
                f"{self.model_name}: composite score {self.score} must be > 0"
            )
        if self.log_score is None:
            object.__setattr__(self, "log_score", math.log(self.score))
        elif abs(self.log_score - math.log(self.score)) > 1e-12:
            raise InputError(
                f"{self.model_name}: log_score {self.log_score} inconsistent "
                f"with ln(score) {math.log(self.score)}"
            )


@dataclass(frozen=True)
class FitReport:
    model_form: str
    slope: float
    intercept: float
    pearson_r: float
    rmse_fit_space: float
    rmse_backtransformed: float
    residuals: tuple[float, ...]  # fit-space residuals, input order
    point_count: int

    def predict_score(self, bpc: float) -> float:
        raw = self.slope * bpc + self.intercept
        return math.exp(raw) if self.model_form == LOG_LINEAR else raw

    def to_dict(self) -> dict:
        return {
            "model_form": self.model_form,
            "slope": self.slope,
            "intercept": self.intercept,
            "pearson_r": self.pearson_r,
            "rmse_fit_space": self.rmse_fit_space,
            "rmse_backtransformed": self.rmse_backtransformed,
            "rmse_backtransformed_pct": 100.0 * self.rmse_backtransformed,
            "point_count": self.point_count,
            "residuals": list(self.residuals),
        }


def fit_least_squares(
    xs: Sequence[float], ys: Sequence[float]
) -> tuple[float, float, float, float]:
    """Ordinary least squares line; returns (slope, intercept, pearson_r, rmse)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("x and y must be 1-d sequences of equal length")
    n = x.size
    if n < 3:
        raise InputError(f"need at least 3 points to fit, got {n}")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    if sxx == 0.0:
        raise InputError("degenerate abscissa: all x values equal")
    if syy == 0.0:
        raise InputError("Pearson undefined: all y values equal")
    slope = sxy / sxx
    intercept = ym - slope * xm
    pearson = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    residuals = y - (slope * x + intercept)
    rmse = float(np.sqrt(np.mean(residuals**2)))
    return slope, intercept, pearson, rmse


def fit_log_model(points: Sequence[ObservationPoint]) -> FitReport:
    """Line in (bpc, ln score) space; back-transformed error in score space."""
    for p in points:
        if p.score <= 0:
            raise InputError(f"{p.model_name}: score {p.score} must be > 0 for the log fit")
    xs = [p.bpc for p in points]
    ys = [p.log_score for p in points]
    slope, intercept, pearson, rmse = fit_least_squares(xs, ys)
    residuals = tuple(y - (slope * x + intercept) for x, y in zip(xs, ys))
    back = [math.exp(slope * x + intercept) for x in xs]
    rmse_back = math.sqrt(
        math.fsum((p.score - b) ** 2 for p, b in zip(points, back)) / len(points)
    )
    return FitReport(
        model_form=LOG_LINEAR,
        slope=slope,
        intercept=intercept,
        pearson_r=pearson,
        rmse_fit_space=rmse,
        rmse_backtransformed=rmse_back,
        residuals=residuals,
        point_count=len(points),
    )


def fit_linear_model(points: Sequence[ObservationPoint]) -> FitReport:
    """Line in (bpc, score) space; fit and back-transformed errors coincide."""
    xs = [p.bpc for p in points]
    ys = [p.score for p in points]
    slope, intercept, pearson, rmse = fit_least_squares(xs, ys)
    residuals = tuple(y - (slope * x + intercept) for x, y in zip(xs, ys))
    return FitReport(
        model_form=LINEAR,
        slope=slope,
        intercept=intercept,
        pearson_r=pearson,
        rmse_fit_space=rmse,
        rmse_backtransformed=rmse,
        residuals=residuals,
        point_count=len(points),
    )


@dataclass(frozen=True)
class ModelComparison:
    reports: tuple[FitReport, ...]  # ranked, best first
    winner: str

    def to_dict(self) -> dict:
        return {
            "winner": self.winner,
            "ranked": [r.to_dict() for r in self.reports],
        }


def compare_models(points: Sequence[ObservationPoint]) -> ModelComparison:
    """Fit both forms on identical points, ranked by back-transformed RMSE."""
    log_report = fit_log_model(points)
    linear_report = fit_linear_model(points)
    ranked = tuple(
        sorted(
            (log_report, linear_report),
            key=lambda r: (r.rmse_backtransformed, r.model_form),
        )
    )
    return ModelComparison(reports=ranked, winner=ranked[0].model_form)


def slice_points(
    points: Sequence[ObservationPoint], slice_label: str
) -> list[ObservationPoint]:
    """Filter points by a ``dimension=value`` label such as ``task=generation``."""
    if "=" not in slice_label:
        raise InputError(f"slice label must look like dimension=value, got {slice_label!r}")
    dimension, value = slice_label.split("=", 1)
    return [p for p in points if p.slices.get(dimension) == value]


def slice_fit(
    points: Sequence[ObservationPoint], slice_label: str, model_form: str = LOG_LINEAR
) -> FitReport:
    subset = slice_points(points, slice_label)
    if len(subset) < 3:
        raise InputError(
            f"slice {slice_label!r} has {len(subset)} points; need at least 3"
        )
    fit = fit_log_model if model_form == LOG_LINEAR else fit_linear_model
    return fit(subset)


# ---------------------------------------------------------------------------
# points I/O and plot emission


def save_points(points: Iterable[ObservationPoint], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for p in points:
            rec = {
                "model": p.model_name,
                "bpc": p.bpc,
                "score": p.score,
                "log_score": p.log_score,
                "slices": dict(sorted(p.slices.items())),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_points(path: str | Path) -> list[ObservationPoint]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"points file not found: {path}")
    points = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                points.append(
                    ObservationPoint(
                        model_name=str(rec["model"]),
                        bpc=float(rec["bpc"]),
                        score=float(rec["score"]),
                        slices=rec.get("slices", {}),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: bad point record: {exc}") from exc
    return points


def _svg_scatter(
    reports: Sequence[FitReport], points: Sequence[ObservationPoint]
) -> str:
    """Self-contained SVG: scatter in (bpc, ln score) space plus fit lines."""
    width, height, margin = 640, 440, 60
    xs = [p.bpc for p in points]
    ys = [p.log_score for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = 0.05 * (x_hi - x_lo) or 0.5
    y_pad = 0.05 * (y_hi - y_lo) or 0.5
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" '
        f'font-size="14">bits per character</text>',
        f'<text x="18" y="{height / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {height / 2:.1f})">log composite score</text>',
    ]
    colors = {LOG_LINEAR: "#d62728", LINEAR: "#1f77b4"}
    for idx, report in enumerate(reports):
        color = colors.get(report.model_form, "#2ca02c")
        steps = 100
        line_pts = []
        for i in range(steps + 1):
            x = x_lo + (x_hi - x_lo) * i / steps
            predicted = report.predict_score(x)
            if predicted <= 0:
                continue
            line_pts.append(f"{sx(x):.2f},{sy(math.log(predicted)):.2f}")
        if line_pts:
            parts.append(
                f'<polyline points="{" ".join(line_pts)}" fill="none" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
        parts.append(
            f'<text x="{width - margin}" y="{margin - 30 + 16 * idx}" '
            f'text-anchor="end" font-size="12" fill="{color}">'
            f"{report.model_form}: rmse={report.rmse_backtransformed:.4f}</text>"
        )
    for p in points:
        parts.append(
            f'<circle cx="{sx(p.bpc):.2f}" cy="{sy(p.log_score):.2f}" r="4" '
            f'fill="#333333" fill-opacity="0.8"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def emit_plot_data(
    reports: Sequence[FitReport],
    points: Sequence[ObservationPoint],
    out_dir: str | Path,
) -> dict[str, Path]:
    """Write the scatter-plus-line SVG and the per-point CSV.

    CSV rows carry the first (winning) report's prediction and residual
    in score space; floats are written with full round-trip precision.
    """
    if not points:
        raise InputError("no points to plot")
    if not reports:
        raise InputError("no fit reports to plot")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        svg_path = out_dir / "fit.svg"
        csv_path = out_dir / "points.csv"
        svg_path.write_text(_svg_scatter(reports, points), encoding="utf-8")
        primary = reports[0]
        with csv_path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "bpc", "score", "log_score", "predicted", "residual"])
            for p in points:
                predicted = primary.predict_score(p.bpc)
                writer.writerow(
                    [
                        p.model_name,
                        repr(p.bpc),
                        repr(p.score),
                        repr(p.log_score),
                        repr(predicted),
                        repr(p.score - predicted),
                    ]
                )
    except OSError as exc:
        raise OutputError(f"cannot write plot data under {out_dir}: {exc}") from exc
    return {"svg": svg_path, "csv": csv_path}


def load_points_csv(path: str | Path) -> list[ObservationPoint]:
    """Re-ingest a points CSV written by :func:`emit_plot_data`."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"points csv not found: {path}")
    points = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            points.append(
                ObservationPoint(
                    model_name=row["model"],
                    bpc=float(row["bpc"]),
                    score=float(row["score"]),
                )
            )
    return points
