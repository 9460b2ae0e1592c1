"""Principal component analysis by eigendecomposition of the sample covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataError, DimensionMismatchError


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (retained, features), orthonormal rows
    explained_variance_ratio: np.ndarray  # of the retained components
    variance_target: float

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def transform(self, X) -> np.ndarray:
        return pca_transform(self, X)

    def inverse_transform(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=float) @ self.components + self.mean

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "components": self.components,
            "explained_variance_ratio": self.explained_variance_ratio,
            "variance_target": self.variance_target,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        width = len(d["mean"])
        return cls(
            np.asarray(d["mean"], dtype=float),
            np.asarray(d["components"], dtype=float).reshape(-1, width),
            np.asarray(d["explained_variance_ratio"], dtype=float),
            float(d["variance_target"]),
        )


def pca_fit(X, variance_target: float = 0.999) -> PcaModel:
    """Keep the fewest leading components whose cumulative explained variance reaches the target."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DegenerateDataError("PCA needs at least two samples")
    if not 0.0 < variance_target <= 1.0:
        raise ValueError("variance_target must lie in (0, 1]")
    mean = X.mean(axis=0)
    centred = X - mean
    cov = centred.T @ centred / (X.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    total = evals.sum()
    if total <= 0.0:
        raise DegenerateDataError("data has zero total variance")
    ratios = evals / total
    if variance_target >= 1.0:
        keep = len(ratios)
    else:
        keep = int(np.searchsorted(np.cumsum(ratios), variance_target) + 1)
        keep = min(keep, len(ratios))
    # deterministic sign: largest-magnitude loading of each component is positive
    comps = evecs[:, :keep].T
    pivots = np.argmax(np.abs(comps), axis=1)
    comps *= np.sign(comps[np.arange(keep), pivots])[:, None]
    return PcaModel(mean, comps, ratios[:keep], float(variance_target))


def pca_transform(model: PcaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.mean.size:
        raise DimensionMismatchError(f"expected {model.mean.size} features, got {X.shape[1]}")
    return (X - model.mean) @ model.components.T
