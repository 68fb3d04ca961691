"""Prediction and selection metrics.

Undefined values (F1 or MCC with a zero denominator, calibration slope for
constant predictions) are reported as ``None``, never as a sentinel number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ZERO_THRESHOLD = 1e-8
METRIC_COLUMNS = ("method", "setting", "replicate", "rmse", "csl", "f1", "mcc")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    csl: float | None
    f1: float | None
    mcc: float | None


def _pair(y_true, y_pred):
    a = np.asarray(y_true, dtype=float).reshape(-1)
    b = np.asarray(y_pred, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def rmse(y_true, y_pred) -> float:
    a, b = _pair(y_true, y_pred)
    if a.size == 0:
        raise ValueError("empty input")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def calibration_slope(y_true, y_pred) -> float | None:
    """Slope of the least-squares line of ``y_true`` on ``y_pred``."""
    a, b = _pair(y_true, y_pred)
    if a.size < 3:
        raise ValueError("need at least 3 points")
    bc = b - b.mean()
    var = float(bc @ bc)
    if var <= 0.0:
        return None
    return float(bc @ (a - a.mean()) / var)


def selection_confusion(beta_hat, beta_true, zero_threshold: float = ZERO_THRESHOLD) -> ConfusionCounts:
    est, truth = _pair(beta_hat, beta_true)
    sel = np.abs(est) > zero_threshold
    act = truth != 0
    return ConfusionCounts(
        tp=int(np.sum(sel & act)),
        tn=int(np.sum(~sel & ~act)),
        fp=int(np.sum(sel & ~act)),
        fn=int(np.sum(~sel & act)),
    )


def f1_score(c: ConfusionCounts) -> float | None:
    denom = 2 * c.tp + c.fp + c.fn
    return None if denom == 0 else 2 * c.tp / denom


def mcc(c: ConfusionCounts) -> float | None:
    factors = (c.tp + c.fp, c.tp + c.fn, c.tn + c.fp, c.tn + c.fn)
    if any(f == 0 for f in factors):
        return None
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(math.prod(factors))


def evaluate(y_target, y_observed, y_pred, coef_hat, coef_true) -> MetricsReport:
    """RMSE against ``y_target``, calibration slope of ``y_observed`` on the
    predictions, and F1/MCC of the estimated support."""
    c = selection_confusion(coef_hat, coef_true)
    return MetricsReport(
        rmse=rmse(y_target, y_pred),
        csl=calibration_slope(y_observed, y_pred),
        f1=f1_score(c),
        mcc=mcc(c),
    )


def summarize_rows(rows, keys=("rmse", "csl", "f1", "mcc")) -> dict:
    """Mean and sample SD of each metric over rows; ``None`` entries are
    skipped and counted. A metric that is never defined stays ``None``."""
    out = {"replicates": len(rows)}
    for k in keys:
        vals = [r[k] for r in rows if r.get(k) is not None]
        out[f"{k}_undefined"] = len(rows) - len(vals)
        if vals:
            v = np.asarray(vals, dtype=float)
            out[f"{k}_mean"] = float(v.mean())
            out[f"{k}_sd"] = float(v.std(ddof=1)) if v.size > 1 else 0.0
        else:
            out[f"{k}_mean"] = None
            out[f"{k}_sd"] = None
    return out
