"""Glue between datasets and learners: target encoding, training, evaluation reports."""

from __future__ import annotations

import math

import numpy as np

from .circuit import SingleModeState
from .dataset import Dataset, DatasetMeta
from .errors import LayoutMismatchError
from .fock import ORDERING_VERSION
from .ml.pipeline import LearnerConfig, Pipeline
from .ml.scoring import regression_metrics, summarize
from .qmetrics import fidelity

REPORT_FORMAT = "fockprint-report"
REPORT_VERSION = 1


def encode_targets(meta: DatasetMeta, Y: np.ndarray) -> np.ndarray:
    """Regression columns: r_0..r_N then (sin phi_l, cos phi_l) for l = 1..N.

    Entanglement targets pass through unchanged.
    """
    Y = np.asarray(Y, dtype=float)
    if meta.kind != "tomography":
        return Y
    N = meta.n
    r = Y[:, : N + 1]
    phi = Y[:, N + 1 :]
    trig = np.empty((Y.shape[0], 2 * N))
    trig[:, 0::2] = np.sin(phi)
    trig[:, 1::2] = np.cos(phi)
    return np.hstack([r, trig])


def decode_targets(meta: DatasetMeta, P: np.ndarray) -> np.ndarray:
    """Inverse of :func:`encode_targets` for predictions.

    Amplitudes are clipped at zero and renormalised; phases come back through
    atan2 into [0, 2 pi).
    """
    P = np.asarray(P, dtype=float)
    if meta.kind != "tomography":
        return P
    N = meta.n
    r = np.clip(P[:, : N + 1], 0.0, None)
    norm = np.linalg.norm(r, axis=1, keepdims=True)
    fallback = np.zeros_like(r)
    fallback[:, 0] = 1.0
    r = np.where(norm > 0, r / np.where(norm > 0, norm, 1.0), fallback)
    sin, cos = P[:, N + 1 :: 2], P[:, N + 2 :: 2]
    phi = np.mod(np.arctan2(sin, cos), 2.0 * math.pi)
    return np.hstack([r, phi])


def dataset_signature(meta: DatasetMeta) -> dict:
    return {"kind": meta.kind, "n": meta.n, "s_max": meta.s_max, "alpha": meta.alpha, "ordering": meta.ordering}


def train(
    data: Dataset,
    config: LearnerConfig,
    *,
    pca_variance: float | None = None,
    standardize: bool | None = None,
    workers: int | None = None,
) -> Pipeline:
    Y = encode_targets(data.meta, data.Y)
    return Pipeline.fit(
        data.X,
        Y,
        config,
        standardize=standardize,
        pca_variance=pca_variance,
        meta=dataset_signature(data.meta),
        workers=workers,
    )


def check_layout(model: Pipeline, meta: DatasetMeta) -> None:
    want = dict(model.meta)
    have = dataset_signature(meta)
    for key in ("kind", "n", "s_max", "ordering"):
        if want.get(key) != have[key]:
            raise LayoutMismatchError(f"model trained on {key}={want.get(key)!r}, dataset has {have[key]!r}")
    if want.get("ordering", ORDERING_VERSION) != ORDERING_VERSION:
        raise LayoutMismatchError("model uses an unknown feature ordering")


def predict_targets(model: Pipeline, data: Dataset) -> np.ndarray:
    check_layout(model, data.meta)
    return decode_targets(data.meta, model.predict(data.X))


def fidelities(N: int, true_targets: np.ndarray, predicted_targets: np.ndarray) -> np.ndarray:
    return np.array(
        [
            fidelity(SingleModeState.from_targets(t), SingleModeState.from_targets(p))
            for t, p in zip(true_targets, predicted_targets)
        ]
    )


def evaluate_predictions(meta: DatasetMeta, true_targets, predicted_targets) -> dict:
    """Report dict: fidelity summary (tomography) or MAE/R^2 summary (entanglement)."""
    true_targets = np.asarray(true_targets, dtype=float)
    predicted_targets = np.asarray(predicted_targets, dtype=float)
    report = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "dataset": dataset_signature(meta),
        "samples": int(true_targets.shape[0]),
    }
    if meta.kind == "tomography":
        fid = fidelities(meta.n, true_targets, predicted_targets)
        report["fidelity"] = summarize(fid)
    else:
        scores = regression_metrics(true_targets[:, 0], predicted_targets[:, 0])
        report["entropy_mean"] = float(true_targets[:, 0].mean())
        report["mae"] = scores.mae
        report["r2"] = scores.r2
        report["r2_defined"] = scores.r2_defined
        report["abs_error"] = scores.abs_error
    return report


def evaluate(model: Pipeline, data: Dataset) -> dict:
    report = evaluate_predictions(data.meta, data.Y, predict_targets(model, data))
    report["learner"] = model.config.kind
    if model.config.kind == "svr":
        report["kernel"] = model.config.kernel.kind
    report["pca_components"] = None if model.pca is None else model.pca.n_components
    return report


_ROW_LABELS = {
    "mean": "Mean",
    "std": "Standard Deviation",
    "min": "Minimum",
    "25%": "25%",
    "50%": "50%",
    "75%": "75%",
    "max": "Maximum",
}


def report_rows(report: dict) -> list[tuple[str, float]]:
    """Rows in the fixed reporting order."""
    if "fidelity" in report:
        return [(_ROW_LABELS[k], v) for k, v in report["fidelity"].items()]
    err = report["abs_error"]
    rows = [("Entropy Mean Value", report["entropy_mean"]), ("MAE", report["mae"])]
    rows += [(_ROW_LABELS[k], err[k]) for k in ("std", "min", "25%", "50%", "75%", "max")]
    rows.append(("R2-score", report["r2"]))
    return rows


def format_table(reports: list[dict], headers: list[str] | None = None) -> str:
    """Side-by-side text table, one column per report."""
    headers = headers or [f"run{i}" for i in range(len(reports))]
    columns = [report_rows(r) for r in reports]
    labels = [label for label, _ in columns[0]]
    width = max(len(x) for x in labels)
    cell = max(10, *(len(h) for h in headers))
    lines = [" " * width + " | " + " | ".join(h.rjust(cell) for h in headers)]
    lines.append("-" * len(lines[0]))
    for row, label in enumerate(labels):
        vals = [f"{col[row][1]:.6f}".rjust(cell) for col in columns]
        lines.append(label.ljust(width) + " | " + " | ".join(vals))
    return "\n".join(lines)
