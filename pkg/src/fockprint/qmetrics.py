"""Fidelity, reduced density matrices, and entanglement entropy of pure states."""

from __future__ import annotations

import numpy as np

from .circuit import BipartiteState, SingleModeState
from .errors import DimensionMismatchError, NotNormalizedError

EIGEN_FLOOR = 1e-15


def fidelity(a: SingleModeState, b: SingleModeState) -> float:
    """Squared overlap |<a|b>|^2 of two pure single-mode states."""
    if a.r.size != b.r.size:
        raise DimensionMismatchError(f"states have N = {a.N} and N = {b.N}")
    overlap = np.vdot(a.coefficients, b.coefficients)
    return float(min(1.0, abs(overlap) ** 2))


def reduced_density(psi: BipartiteState, keep: str = "A") -> np.ndarray:
    """Partial trace of |psi><psi|; ``keep`` is "A" (first mode) or "B"."""
    c = psi.coefficients
    if keep == "A":
        return c @ c.conj().T
    if keep == "B":
        return c.T @ c.conj()
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-Tr(rho ln rho) from a Hermitian eigendecomposition."""
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > EIGEN_FLOOR]
    return float(-np.sum(lam * np.log(lam)))


def schmidt_coefficients(psi: BipartiteState) -> np.ndarray:
    """Squared singular values of the coefficient matrix, descending."""
    return np.linalg.svd(psi.coefficients, compute_uv=False) ** 2


def entanglement_entropy(psi: BipartiteState) -> float:
    """Entropy of either reduced state, in nats, via the Schmidt decomposition."""
    lam = schmidt_coefficients(psi)
    if abs(lam.sum() - 1.0) > 1e-10:
        raise NotNormalizedError(f"Schmidt weights sum to {lam.sum()!r}")
    lam = lam[lam >= EIGEN_FLOOR]
    return float(max(0.0, -np.sum(lam * np.log(lam))))
