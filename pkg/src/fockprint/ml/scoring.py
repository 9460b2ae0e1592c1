"""Regression scores and the seven-number summaries used in reports."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatchError

SUMMARY_KEYS = ("mean", "std", "min", "25%", "50%", "75%", "max")


def summarize(values) -> dict[str, float]:
    """Mean, sample standard deviation, min, quartiles (linear interpolation) and max."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise LengthMismatchError("cannot summarise an empty sample")
    q25, q50, q75 = np.percentile(v, [25, 50, 75])
    return {
        "mean": float(v.mean()),
        "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        "min": float(v.min()),
        "25%": float(q25),
        "50%": float(q50),
        "75%": float(q75),
        "max": float(v.max()),
    }


@dataclass
class RegressionScores:
    mae: float
    r2: float  # NaN when y_true is constant
    r2_defined: bool
    abs_error: dict[str, float]

    def to_dict(self) -> dict:
        return {"mae": self.mae, "r2": self.r2, "r2_defined": self.r2_defined, "abs_error": self.abs_error}


def mean_absolute_error(y_true, y_pred) -> float:
    return float(np.mean(np.abs(np.asarray(y_true, float) - np.asarray(y_pred, float))))


def r2_score(y_true, y_pred) -> float:
    """1 - SSE/SST; NaN if ``y_true`` is constant."""
    t = np.asarray(y_true, dtype=float)
    p = np.asarray(y_pred, dtype=float)
    sst = float(np.sum((t - t.mean()) ** 2))
    if sst == 0.0:
        return math.nan
    return 1.0 - float(np.sum((t - p) ** 2)) / sst


def regression_metrics(y_true, y_pred) -> RegressionScores:
    t = np.asarray(y_true, dtype=float).ravel()
    p = np.asarray(y_pred, dtype=float).ravel()
    if t.size != p.size:
        raise LengthMismatchError(f"{t.size} targets but {p.size} predictions")
    if t.size == 0:
        raise LengthMismatchError("metrics need at least one sample")
    r2 = r2_score(t, p)
    return RegressionScores(mean_absolute_error(t, p), r2, not math.isnan(r2), summarize(np.abs(t - p)))
