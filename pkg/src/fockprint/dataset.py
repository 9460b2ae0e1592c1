"""Random unknown states, pattern features, and dataset files."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import jsonio
from .circuit import (
    BipartiteState,
    LinearNetwork,
    PatternDistribution,
    SingleModeState,
    entanglement_input,
    fixed_four_mode_circuit,
    output_distribution,
    tomography_input,
)
from .errors import CorruptRecordError, DatasetIOError, FormatError, LayoutMismatchError
from .fock import ORDERING_VERSION, configuration_count
from .parallel import ordered_map
from .qmetrics import entanglement_entropy

DATASET_FORMAT = "fockprint-dataset"
DATASET_VERSION = 1
KINDS = ("tomography", "entanglement")
MODES = 4

DEFAULT_ALPHA = 1.0
DEFAULT_S_MAX = 5


def sample_single_mode_state(N: int, rng: np.random.Generator) -> SingleModeState:
    """Unit vector drawn uniformly from the complex sphere in C^(N+1)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    z = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
    return SingleModeState.from_coefficients(z)


def sample_bipartite_state(N: int, rng: np.random.Generator) -> BipartiteState:
    """Uniform unit vector over the (N+1) x (N+1) two-mode coefficients."""
    if N < 1:
        raise ValueError("N must be at least 1")
    shape = (N + 1, N + 1)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return BipartiteState.from_coefficients(z)


def feature_length(s_max: int, modes: int = MODES) -> int:
    return sum(configuration_count(modes, s) for s in range(s_max + 1))


def featurize(dist: PatternDistribution, s_max: int | None = None) -> np.ndarray:
    """Concatenate the probability blocks s = 0..s_max in configuration order."""
    s_max = dist.s_max if s_max is None else s_max
    if dist.s_max != s_max or len(dist.blocks) != s_max + 1:
        raise LayoutMismatchError(f"distribution covers s <= {dist.s_max}, expected s <= {s_max}")
    for s, block in enumerate(dist.blocks):
        if block.shape != (configuration_count(dist.modes, s),):
            raise LayoutMismatchError(f"block {s} has {block.shape[0]} entries")
    return np.concatenate(dist.blocks)


def child_seed(base_seed: int, index: int) -> int:
    """Independent per-sample seed; the same (base_seed, index) always gives the same value."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class DatasetMeta:
    kind: str
    n: int
    alpha: float = DEFAULT_ALPHA
    s_max: int = DEFAULT_S_MAX
    base_seed: int = 0
    count: int = 0
    ordering: str = ORDERING_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    @property
    def feature_length(self) -> int:
        return feature_length(self.s_max)

    def to_record(self) -> dict:
        return {
            "format": DATASET_FORMAT,
            "version": DATASET_VERSION,
            "ordering": self.ordering,
            "kind": self.kind,
            "n": self.n,
            "alpha": float(self.alpha),
            "s_max": self.s_max,
            "base_seed": self.base_seed,
            "count": self.count,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "DatasetMeta":
        if rec.get("format") != DATASET_FORMAT or rec.get("version") != DATASET_VERSION:
            raise FormatError(f"unsupported dataset format {rec.get('format')!r} v{rec.get('version')!r}")
        if rec.get("ordering") != ORDERING_VERSION:
            raise FormatError(f"feature ordering {rec.get('ordering')!r} != {ORDERING_VERSION!r}")
        try:
            return cls(
                kind=rec["kind"],
                n=int(rec["n"]),
                alpha=float(rec["alpha"]),
                s_max=int(rec["s_max"]),
                base_seed=int(rec["base_seed"]),
                count=int(rec["count"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptRecordError(f"bad meta record: {exc}") from exc


@dataclass
class PatternSample:
    sample_id: int
    seed: int
    features: np.ndarray
    targets: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, PatternSample)
            and self.sample_id == other.sample_id
            and self.seed == other.seed
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.targets, other.targets)
        )


@dataclass
class Dataset:
    meta: DatasetMeta
    samples: list[PatternSample] = field(default_factory=list)

    @property
    def X(self) -> np.ndarray:
        if not self.samples:
            return np.zeros((0, self.meta.feature_length))
        return np.vstack([s.features for s in self.samples])

    @property
    def Y(self) -> np.ndarray:
        if not self.samples:
            return np.zeros((0, 0))
        return np.vstack([s.targets for s in self.samples])

    def __len__(self) -> int:
        return len(self.samples)


_NETWORK: LinearNetwork | None = None


def shared_circuit() -> LinearNetwork:
    """Process-wide fixed circuit, so its transfer-amplitude cache is reused."""
    global _NETWORK
    if _NETWORK is None:
        _NETWORK = fixed_four_mode_circuit()
    return _NETWORK


def simulate_sample(kind: str, N: int, alpha: float, s_max: int, seed: int, sample_id: int = 0) -> PatternSample:
    rng = np.random.default_rng(seed)
    net = shared_circuit()
    if kind == "tomography":
        eta = sample_single_mode_state(N, rng)
        dist = output_distribution(net, tomography_input(eta, alpha, s_max), s_max)
        targets = eta.targets()
    elif kind == "entanglement":
        psi = sample_bipartite_state(N, rng)
        dist = output_distribution(net, entanglement_input(psi, alpha, s_max), s_max)
        targets = np.array([entanglement_entropy(psi)])
    else:
        raise ValueError(f"unknown experiment kind {kind!r}")
    return PatternSample(sample_id, seed, featurize(dist, s_max), targets)


def generate_dataset(
    kind: str,
    N: int,
    count: int,
    alpha: float = DEFAULT_ALPHA,
    s_max: int = DEFAULT_S_MAX,
    base_seed: int = 0,
    workers: int | None = None,
) -> Dataset:
    """Simulate ``count`` patterns; sample i uses seed ``child_seed(base_seed, i)``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    meta = DatasetMeta(kind, N, float(alpha), s_max, base_seed, count)

    def one(i: int) -> PatternSample:
        return simulate_sample(kind, N, alpha, s_max, child_seed(base_seed, i), i)

    return Dataset(meta, ordered_map(one, range(count), workers))


def save_jsonl(dataset: Dataset, path) -> None:
    """First line is the meta record, then one sample per line."""
    lines = [jsonio.dumps(dataset.meta.to_record())]
    for s in dataset.samples:
        lines.append(
            jsonio.dumps(
                {
                    "id": s.sample_id,
                    "seed": s.seed,
                    "features": [float(x) for x in s.features],
                    "targets": [float(x) for x in s.targets],
                }
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise DatasetIOError(f"cannot write {path}: {exc}") from exc


def load_jsonl(path) -> Dataset:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CorruptRecordError(f"{path} is empty")
    try:
        head = jsonio.loads(lines[0])
    except ValueError as exc:
        raise CorruptRecordError(f"meta line is not JSON: {exc}") from exc
    if not isinstance(head, dict):
        raise CorruptRecordError("meta line is not an object")
    meta = DatasetMeta.from_record(head)
    width = meta.feature_length
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            rec = jsonio.loads(line)
            sample = PatternSample(
                int(rec["id"]),
                int(rec["seed"]),
                np.asarray(rec["features"], dtype=float),
                np.asarray(rec["targets"], dtype=float),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptRecordError(f"{path}:{lineno}: {exc}") from exc
        if sample.features.shape != (width,):
            raise CorruptRecordError(f"{path}:{lineno}: expected {width} features")
        samples.append(sample)
    if len(samples) != meta.count:
        raise CorruptRecordError(f"{path}: meta says {meta.count} samples, found {len(samples)}")
    return Dataset(meta, samples)


def export_csv(dataset: Dataset, path) -> None:
    """Header feature_0..feature_k, target_0..target_m, then one row per sample."""
    n_feat = dataset.meta.feature_length
    n_tgt = dataset.samples[0].targets.size if dataset.samples else target_width(dataset.meta)
    header = [f"feature_{i}" for i in range(n_feat)] + [f"target_{j}" for j in range(n_tgt)]
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for s in dataset.samples:
                w.writerow([format(float(x), ".17g") for x in (*s.features, *s.targets)])
    except OSError as exc:
        raise DatasetIOError(f"cannot write {path}: {exc}") from exc


def target_width(meta: DatasetMeta) -> int:
    return 2 * meta.n + 1 if meta.kind == "tomography" else 1


def target_names(meta: DatasetMeta) -> Sequence[str]:
    if meta.kind == "tomography":
        return [f"r{i}" for i in range(meta.n + 1)] + [f"phi{i}" for i in range(1, meta.n + 1)]
    return ["entropy"]
