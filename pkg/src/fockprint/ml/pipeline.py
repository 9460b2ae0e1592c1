"""Standardisation, optional PCA, and one learner per target column."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DimensionMismatchError, FormatError
from ..parallel import ordered_map
from .ert import ErtModel, ert_fit
from .pca import PcaModel, pca_fit
from .svr import KernelSpec, SvrModel, gram, svr_fit_gram

MODEL_FORMAT = "fockprint-model"
MODEL_VERSION = 1
LEARNERS = ("svr", "ert")


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        scale = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(scale > 0, scale, 1.0))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.mean.size:
            raise DimensionMismatchError(f"expected {self.mean.size} features, got {X.shape[-1]}")
        return (X - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": self.mean, "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["scale"], dtype=float))


@dataclass(frozen=True)
class LearnerConfig:
    kind: str = "svr"
    kernel: KernelSpec = field(default_factory=KernelSpec)
    C: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-3
    max_passes: int = 100
    n_trees: int = 100
    max_features: int | None = None
    min_samples_split: int = 2
    max_depth: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in LEARNERS:
            raise ValueError(f"learner must be one of {LEARNERS}, got {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "epsilon": self.epsilon,
            "tol": self.tol,
            "max_passes": self.max_passes,
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "min_samples_split": self.min_samples_split,
            "max_depth": self.max_depth,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerConfig":
        return cls(
            kind=d["kind"],
            kernel=KernelSpec.from_dict(d["kernel"]),
            C=float(d["C"]),
            epsilon=float(d["epsilon"]),
            tol=float(d["tol"]),
            max_passes=int(d["max_passes"]),
            n_trees=int(d["n_trees"]),
            max_features=None if d["max_features"] is None else int(d["max_features"]),
            min_samples_split=int(d["min_samples_split"]),
            max_depth=None if d["max_depth"] is None else int(d["max_depth"]),
            seed=int(d["seed"]),
        )


def column_seed(seed: int, column: int) -> int:
    return int(np.random.SeedSequence([seed, column]).generate_state(1, np.uint32)[0])


Model = SvrModel | ErtModel


def multi_output_fit(X, Y, config: LearnerConfig, workers: int | None = None) -> list[Model]:
    """Independent model per target column; SVR columns share one Gram matrix."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[1] < 1:
        raise ValueError("need at least one target column")
    cols = range(Y.shape[1])
    if config.kind == "svr":
        kernel = config.kernel.resolved(X)
        K = gram(kernel, X, X)
        return ordered_map(
            lambda c: svr_fit_gram(K, X, Y[:, c], kernel, config.C, config.epsilon, config.tol, config.max_passes),
            cols,
            workers,
        )
    return ordered_map(
        lambda c: ert_fit(
            X,
            Y[:, c],
            config.n_trees,
            config.max_features,
            config.min_samples_split,
            config.max_depth,
            column_seed(config.seed, c),
        ),
        cols,
        workers,
    )


def multi_output_predict(models: list[Model], X) -> np.ndarray:
    return np.column_stack([m.predict(X) for m in models])


@dataclass
class Pipeline:
    """Fitted preprocessing plus per-column learners, serialisable to JSON."""

    config: LearnerConfig
    models: list[Model]
    standardizer: Standardizer | None = None
    pca: PcaModel | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def fit(
        cls,
        X,
        Y,
        config: LearnerConfig,
        *,
        standardize: bool | None = None,
        pca_variance: float | None = None,
        meta: dict | None = None,
        workers: int | None = None,
    ) -> "Pipeline":
        """Standardisation defaults to on for SVR or whenever PCA is requested."""
        X = np.asarray(X, dtype=float)
        if standardize is None:
            standardize = config.kind == "svr" or pca_variance is not None
        std = Standardizer.fit(X) if standardize else None
        Z = std.transform(X) if std else X
        pca = pca_fit(Z, pca_variance) if pca_variance is not None else None
        if pca is not None:
            Z = pca.transform(Z)
        if config.kind == "svr":
            config = replace(config, kernel=config.kernel.resolved(Z))
        models = multi_output_fit(Z, Y, config, workers)
        return cls(config, models, std, pca, dict(meta or {}))

    def features(self, X) -> np.ndarray:
        Z = np.asarray(X, dtype=float)
        if self.standardizer is not None:
            Z = self.standardizer.transform(Z)
        if self.pca is not None:
            Z = self.pca.transform(Z)
        return Z

    def predict(self, X) -> np.ndarray:
        return multi_output_predict(self.models, self.features(X))

    @property
    def converged(self) -> bool:
        return all(getattr(m, "converged", True) for m in self.models)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "meta": self.meta,
            "config": self.config.to_dict(),
            "standardizer": None if self.standardizer is None else self.standardizer.to_dict(),
            "pca": None if self.pca is None else self.pca.to_dict(),
            "models": [m.to_dict() for m in self.models],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Pipeline":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise FormatError(f"unsupported model format {d.get('format')!r} v{d.get('version')!r}")
        config = LearnerConfig.from_dict(d["config"])
        loader = SvrModel.from_dict if config.kind == "svr" else ErtModel.from_dict
        return cls(
            config,
            [loader(m) for m in d["models"]],
            None if d["standardizer"] is None else Standardizer.from_dict(d["standardizer"]),
            None if d["pca"] is None else PcaModel.from_dict(d["pca"]),
            dict(d.get("meta") or {}),
        )
