"""The four-mode interferometer, its input states, and output pattern distributions.

Convention: a photon entering mode q leaves in mode p with amplitude U[p, q],
i.e. output mode amplitudes are ``U @ input``. The permanent submatrix built
in :mod:`fockprint.permanent` follows the same rule.
"""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from .errors import ModeMismatchError, NonUnitaryError, NotNormalizedError, ScaleExceededError
from .fock import (
    CoherentSpec,
    FockAmplitudeState,
    ModeConfiguration,
    coherent_weight,
    enumerate_configurations,
    log_factorial,
)
from .permanent import transfer_amplitudes

TWO_PI = 2.0 * math.pi
UNITARITY_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-12
ORACLE_MAX_PHOTONS = 10


class LinearNetwork:
    """An M-mode passive linear interferometer given by its unitary matrix."""

    def __init__(self, unitary, *, tolerance: float = UNITARITY_TOLERANCE):
        U = np.array(unitary, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise NonUnitaryError(f"network matrix must be square, got shape {U.shape}")
        defect = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) if U.size else 0.0
        if defect > tolerance:
            raise NonUnitaryError(f"U^dagger U deviates from identity by {defect:.3e}")
        U.setflags(write=False)
        self.unitary = U
        self._transfer: dict[ModeConfiguration, np.ndarray] = {}

    @property
    def mode_count(self) -> int:
        return self.unitary.shape[0]

    def __repr__(self) -> str:
        return f"LinearNetwork(mode_count={self.mode_count})"

    def transfer(self, inp: ModeConfiguration) -> np.ndarray:
        """Amplitudes from ``inp`` to every output with the same photon number.

        Entries follow ``enumerate_configurations(M, sum(inp))``. Results are
        memoised per input since the dataset generator revisits the same few
        inputs for every sample.
        """
        cached = self._transfer.get(inp)
        if cached is None:
            outputs = enumerate_configurations(self.mode_count, sum(inp))
            cached = transfer_amplitudes(self.unitary, inp, outputs)
            cached.setflags(write=False)
            self._transfer[inp] = cached
        return cached


def fixed_four_mode_circuit() -> LinearNetwork:
    """Three 50:50 beam splitters on four modes, in explicit matrix form."""
    a = 1.0 / math.sqrt(2.0)
    b = 0.5  # a**2, written exactly
    return LinearNetwork(
        [
            [a, -b, b, 0.0],
            [a, b, -b, 0.0],
            [0.0, b, b, -a],
            [0.0, b, b, a],
        ]
    )


def beam_splitter(modes: int, i: int, j: int, transmissivity: float = 0.5, phase: float = 0.0) -> LinearNetwork:
    """Two-mode splitter between modes ``i`` and ``j`` embedded in ``modes`` modes."""
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    U = np.eye(modes, dtype=complex)
    U[i, i] = t
    U[i, j] = -r * cmath.exp(-1j * phase)
    U[j, i] = r * cmath.exp(1j * phase)
    U[j, j] = t
    return LinearNetwork(U)


def compose(*networks: LinearNetwork) -> LinearNetwork:
    """Network equivalent to applying ``networks`` left to right."""
    U = np.eye(networks[0].mode_count, dtype=complex)
    for net in networks:
        U = net.unitary @ U
    return LinearNetwork(U, tolerance=1e-10)


def _wrap_phase(phi):
    return np.mod(phi, TWO_PI)


@dataclass(frozen=True)
class SingleModeState:
    """sum_l r_l e^{i phi_l} |l> with the phase of |0> fixed to zero."""

    r: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        phi = _wrap_phase(np.asarray(self.phi, dtype=float))
        if r.shape != phi.shape or r.ndim != 1 or r.size < 1:
            raise ValueError("r and phi must be equal-length 1-D sequences")
        if np.any(r < 0):
            raise ValueError("amplitudes r must be non-negative")
        if abs(float(np.sum(r**2)) - 1.0) > NORM_TOLERANCE:
            raise NotNormalizedError(f"sum r^2 = {np.sum(r**2)!r}")
        if phi[0] != 0.0:
            raise ValueError("phi_0 must be 0 (global phase gauge)")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_coefficients(cls, coefficients) -> "SingleModeState":
        """Normalise, remove the global phase, and split into moduli and phases."""
        c = np.asarray(coefficients, dtype=complex)
        c = c / np.linalg.norm(c)
        if abs(c[0]) > 0:
            c = c * np.exp(-1j * np.angle(c[0]))
        phi = _wrap_phase(np.angle(c))
        phi[0] = 0.0
        return cls(np.abs(c), phi)

    @property
    def N(self) -> int:
        return self.r.size - 1

    @property
    def coefficients(self) -> np.ndarray:
        return self.r * np.exp(1j * self.phi)

    def targets(self) -> np.ndarray:
        """Regression targets r_0..r_N, phi_1..phi_N."""
        return np.concatenate([self.r, self.phi[1:]])

    @classmethod
    def from_targets(cls, targets) -> "SingleModeState":
        t = np.asarray(targets, dtype=float)
        N = (t.size - 1) // 2
        return cls(t[: N + 1], np.concatenate([[0.0], t[N + 1 :]]))


@dataclass(frozen=True)
class BipartiteState:
    """sum_{j,v} r_jv e^{i phi_jv} |j>|v> on two modes, global phase fixed.

    The gauge sets the phase of the first nonzero coefficient (row-major) to 0.
    """

    r: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        phi = _wrap_phase(np.asarray(self.phi, dtype=float))
        if r.shape != phi.shape or r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValueError("r and phi must be equal square matrices")
        if np.any(r < 0):
            raise ValueError("amplitudes r must be non-negative")
        if abs(float(np.sum(r**2)) - 1.0) > NORM_TOLERANCE:
            raise NotNormalizedError(f"sum r^2 = {np.sum(r**2)!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_coefficients(cls, coefficients) -> "BipartiteState":
        c = np.asarray(coefficients, dtype=complex)
        c = c / np.linalg.norm(c)
        flat = c.ravel()
        lead = int(np.flatnonzero(np.abs(flat) > 0)[0])
        c = c * np.exp(-1j * np.angle(flat[lead]))
        phi = _wrap_phase(np.angle(c))
        phi.ravel()[lead] = 0.0
        return cls(np.abs(c), phi)

    @property
    def N(self) -> int:
        return self.r.shape[0] - 1

    @property
    def coefficients(self) -> np.ndarray:
        return self.r * np.exp(1j * self.phi)


def _magnitude(alpha: Union[float, CoherentSpec]) -> float:
    return alpha.magnitude if isinstance(alpha, CoherentSpec) else float(alpha)


def _reference_terms(alpha: float, photons: int) -> Iterator[tuple[int, int, complex]]:
    """(m, n, weight) for m photons in mode 1 and n in mode 4, m + n = photons.

    weight = i^n e^{-|a|^2} |a|^{m+n} / sqrt(m! n!); mode 1 carries theta = 0
    and mode 4 theta = pi/2.
    """
    pref = math.exp(-alpha * alpha)
    for n in range(photons + 1):
        m = photons - n
        yield m, n, (1j) ** n * pref * coherent_weight(alpha, m) * coherent_weight(alpha, n)


def tomography_input(eta: SingleModeState, alpha, s_max: int) -> FockAmplitudeState:
    """|alpha>_1 |0>_2 |eta>_3 |i alpha>_4 truncated to at most ``s_max`` photons."""
    alpha = _magnitude(alpha)
    c = eta.coefficients
    amps: dict[ModeConfiguration, complex] = {}
    for s in range(s_max + 1):
        for ell in range(min(s, eta.N) + 1):
            if c[ell] == 0:
                continue
            for m, n, w in _reference_terms(alpha, s - ell):
                if w != 0:
                    amps[(m, 0, ell, n)] = w * c[ell]
    return FockAmplitudeState(4, amps)


def entanglement_input(psi: BipartiteState, alpha, s_max: int) -> FockAmplitudeState:
    """|alpha>_1 |psi>_23 |i alpha>_4 truncated to at most ``s_max`` photons."""
    alpha = _magnitude(alpha)
    c = psi.coefficients
    amps: dict[ModeConfiguration, complex] = {}
    for s in range(s_max + 1):
        for j in range(min(s, psi.N) + 1):
            for v in range(min(s - j, psi.N) + 1):
                if c[j, v] == 0:
                    continue
                for m, n, w in _reference_terms(alpha, s - j - v):
                    if w != 0:
                        amps[(m, j, v, n)] = w * c[j, v]
    return FockAmplitudeState(4, amps)


@dataclass
class PatternDistribution:
    """Output-configuration probabilities for photon numbers 0..s_max.

    ``blocks[s]`` is aligned with ``enumerate_configurations(modes, s)``.
    """

    modes: int
    s_max: int
    blocks: list[np.ndarray] = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(sum(b.sum() for b in self.blocks))

    @property
    def truncation_defect(self) -> float:
        return 1.0 - self.total

    def probability(self, config: ModeConfiguration) -> float:
        s = sum(config)
        if len(config) != self.modes or s > self.s_max:
            return 0.0
        return float(self.blocks[s][enumerate_configurations(self.modes, s).index(tuple(config))])

    def items(self) -> Iterator[tuple[ModeConfiguration, float]]:
        for s, block in enumerate(self.blocks):
            yield from zip(enumerate_configurations(self.modes, s), block.tolist())

    def as_dict(self) -> dict[ModeConfiguration, float]:
        return dict(self.items())

    def max_deviation(self, other: "PatternDistribution") -> float:
        if (self.modes, self.s_max) != (other.modes, other.s_max):
            raise ModeMismatchError("distributions cover different layouts")
        return float(max(np.max(np.abs(a - b)) for a, b in zip(self.blocks, other.blocks)))


def _as_network(net) -> LinearNetwork:
    return net if isinstance(net, LinearNetwork) else LinearNetwork(net)


def output_distribution(net, state: FockAmplitudeState, s_max: int) -> PatternDistribution:
    """Probabilities |sum_I amp(I) <O|U|I>|^2 for every output O with <= s_max photons.

    Input terms are summed coherently within each photon-number block before
    squaring; linear optics never mixes blocks.
    """
    net = _as_network(net)
    M = net.mode_count
    if state.modes != M:
        raise ModeMismatchError(f"input has {state.modes} modes, network has {M}")
    blocks = []
    for s in range(s_max + 1):
        out = np.zeros(len(enumerate_configurations(M, s)), dtype=complex)
        for inp, amp in state.block(s).items():
            out += amp * net.transfer(inp)
        blocks.append(np.abs(out) ** 2)
    return PatternDistribution(M, s_max, blocks)


def _expand_creation_monomial(U: np.ndarray, inp: ModeConfiguration) -> dict[ModeConfiguration, complex]:
    """Multiply out prod_q (sum_p U[p, q] a_p^dagger)^{inp[q]} as a polynomial."""
    M = U.shape[0]
    poly: dict[ModeConfiguration, complex] = {(0,) * M: 1.0 + 0j}
    for q, count in enumerate(inp):
        for _ in range(count):
            nxt: dict[ModeConfiguration, complex] = defaultdict(complex)
            for mono, coef in poly.items():
                for p in range(M):
                    u = U[p, q]
                    if u != 0:
                        bumped = mono[:p] + (mono[p] + 1,) + mono[p + 1 :]
                        nxt[bumped] += coef * u
            poly = nxt
    return poly


def brute_force_output(net, state: FockAmplitudeState, s_max: int) -> PatternDistribution:
    """Reference distribution obtained without permanents.

    Each input term (prod_q a_q^dagger^{I_q} / sqrt(I_q!)) |0> is expanded
    by substituting the mode transformation of the creation operators and
    multiplying out; a monomial prod_p a_p^dagger^{O_p} |0> equals
    sqrt(prod_p O_p!) |O>.
    """
    net = _as_network(net)
    M = net.mode_count
    if state.modes != M:
        raise ModeMismatchError(f"input has {state.modes} modes, network has {M}")
    out_amps: dict[ModeConfiguration, complex] = defaultdict(complex)
    for inp, amp in state:
        s = sum(inp)
        if s > s_max:
            continue
        if s > ORACLE_MAX_PHOTONS:
            raise ScaleExceededError(f"oracle limited to {ORACLE_MAX_PHOTONS} photons per term, got {s}")
        in_norm = math.exp(-0.5 * sum(log_factorial(c) for c in inp))
        for mono, coef in _expand_creation_monomial(net.unitary, inp).items():
            out_norm = math.exp(0.5 * sum(log_factorial(c) for c in mono))
            out_amps[mono] += amp * coef * in_norm * out_norm
    blocks = [
        np.array([abs(out_amps.get(c, 0j)) ** 2 for c in enumerate_configurations(M, s)])
        for s in range(s_max + 1)
    ]
    return PatternDistribution(M, s_max, blocks)
