"""Fock-space bookkeeping: mode configurations, coherent amplitudes, factorials."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cache
from itertools import accumulate
from typing import Iterator, Mapping

import numpy as np

from .errors import ModeMismatchError

# A mode configuration is the tuple of photon counts per optical mode.
ModeConfiguration = tuple[int, ...]

# Bumped whenever enumerate_configurations changes order; stored in dataset files.
ORDERING_VERSION = "lex-v1"

DEFAULT_TAIL_TOLERANCE = 1e-10


@cache
def enumerate_configurations(modes: int, photons: int) -> tuple[ModeConfiguration, ...]:
    """All ways to place ``photons`` photons in ``modes`` modes.

    The result is in ascending lexicographic order of the count tuples, which
    fixes the feature layout of every dataset produced by this package.

    Args:
        modes: number of optical modes, at least 1
        photons: total photon number, at least 0

    Returns:
        Tuple of ``C(photons + modes - 1, modes - 1)`` configurations.
    """
    if modes < 1 or photons < 0:
        raise ValueError(f"need modes >= 1 and photons >= 0, got {modes}, {photons}")
    if modes == 1:
        return ((photons,),)
    out = []
    for first in range(photons + 1):
        for rest in enumerate_configurations(modes - 1, photons - first):
            out.append((first, *rest))
    return tuple(out)


def configuration_count(modes: int, photons: int) -> int:
    return math.comb(photons + modes - 1, modes - 1)


def prefix_sums(config: ModeConfiguration) -> tuple[int, ...]:
    """Cumulative photon counts S_0 = 0, S_1, ..., S_M."""
    return (0, *accumulate(config))


@cache
def log_factorial(n: int) -> float:
    """ln(n!), integer-exact up to 20! and via lgamma beyond."""
    if n < 0:
        raise ValueError("log_factorial needs n >= 0")
    if n <= 20:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


def poisson_tail(magnitude: float, cutoff: int) -> float:
    """Probability mass of photon numbers above ``cutoff`` for a coherent state."""
    mean = magnitude * magnitude
    if mean == 0.0:
        return 0.0
    # summed term by term: 1 - head cancels catastrophically for tiny tails
    total = 0.0
    n = cutoff + 1
    while True:
        term = math.exp(-mean + n * math.log(mean) - log_factorial(n))
        total += term
        if n > mean and term <= total * 1e-17:
            return total
        n += 1


@dataclass(frozen=True)
class CoherentSpec:
    """Coherent state |alpha e^{i theta}> truncated at ``cutoff`` photons."""

    magnitude: float
    phase: float = 0.0
    cutoff: int = 0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("coherent magnitude must be non-negative")
        if self.cutoff < 0:
            raise ValueError("cutoff must be non-negative")

    @classmethod
    def with_tolerance(
        cls, magnitude: float, phase: float = 0.0, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
    ) -> "CoherentSpec":
        """Smallest cutoff whose discarded Poisson tail is below ``tail_tolerance``."""
        cutoff = 1
        while poisson_tail(magnitude, cutoff) >= tail_tolerance:
            cutoff += 1
        return cls(magnitude, phase, cutoff)

    @property
    def tail(self) -> float:
        return poisson_tail(self.magnitude, self.cutoff)


def coherent_amplitudes(spec: CoherentSpec) -> np.ndarray:
    """Fock amplitudes e^{-|a|^2/2} e^{i n theta} |a|^n / sqrt(n!) for n = 0..cutoff."""
    n = np.arange(spec.cutoff + 1)
    if spec.magnitude == 0.0:
        mags = (n == 0).astype(float)
    else:
        logf = np.array([log_factorial(k) for k in n])
        mags = np.exp(-0.5 * spec.magnitude**2 + n * math.log(spec.magnitude) - 0.5 * logf)
    return mags * np.exp(1j * n * spec.phase)


def coherent_weight(magnitude: float, photons: int) -> float:
    """|a|^n / sqrt(n!) without the Gaussian prefactor; 0^0 is taken as 1."""
    if photons == 0:
        return 1.0
    if magnitude == 0.0:
        return 0.0
    return math.exp(photons * math.log(magnitude) - 0.5 * log_factorial(photons))


@dataclass
class FockAmplitudeState:
    """Finite superposition of Fock configurations sharing one mode count."""

    modes: int
    amplitudes: dict[ModeConfiguration, complex] = field(default_factory=dict)

    def __post_init__(self):
        for config in self.amplitudes:
            if len(config) != self.modes:
                raise ModeMismatchError(f"configuration {config} does not have {self.modes} modes")

    @classmethod
    def from_mapping(cls, amplitudes: Mapping[ModeConfiguration, complex]) -> "FockAmplitudeState":
        items = {tuple(int(c) for c in k): complex(v) for k, v in amplitudes.items()}
        if not items:
            raise ValueError("cannot infer mode count from an empty mapping")
        return cls(len(next(iter(items))), items)

    def __iter__(self) -> Iterator[tuple[ModeConfiguration, complex]]:
        return iter(self.amplitudes.items())

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __getitem__(self, config: ModeConfiguration) -> complex:
        return self.amplitudes.get(tuple(config), 0j)

    def norm_squared(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.amplitudes.values()))

    def photon_numbers(self) -> list[int]:
        return sorted({sum(c) for c in self.amplitudes})

    def block(self, photons: int) -> dict[ModeConfiguration, complex]:
        """Terms carrying exactly ``photons`` photons."""
        return {c: v for c, v in self.amplitudes.items() if sum(c) == photons}
