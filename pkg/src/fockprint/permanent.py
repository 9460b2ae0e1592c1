"""Matrix permanents and the permanent-based transition amplitudes of a linear network."""

from __future__ import annotations

import math
from itertools import product
from typing import Sequence

import numpy as np

from .errors import ModeMismatchError, NonSquareError, PhotonMismatchError, SizeExceededError
from .fock import ModeConfiguration, log_factorial

MAX_PERMANENT_SIZE = 25


def permanent(A: np.ndarray) -> complex:
    """Permanent of a square matrix by Ryser's formula with Gray-code updates.

    Runs in O(2^n n). The empty matrix has permanent 1.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSquareError(f"permanent needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n > MAX_PERMANENT_SIZE:
        raise SizeExceededError(f"permanent size {n} exceeds {MAX_PERMANENT_SIZE}")
    if n == 0:
        return 1.0 + 0j

    cols = [A[:, j].copy() for j in range(n)]
    rowsums = np.zeros(n, dtype=complex)
    in_subset = [False] * n
    total = 0j
    sign = -1.0  # (-1)^{|S|}, starts at the one-element subset
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        if in_subset[j]:
            rowsums -= cols[j]
        else:
            rowsums += cols[j]
        in_subset[j] = not in_subset[j]
        total += sign * np.prod(rowsums)
        sign = -sign
    return complex((-1) ** n * total)


def _check_pair(U: np.ndarray, inp: Sequence[int], out: Sequence[int]) -> None:
    M = U.shape[0]
    if U.ndim != 2 or U.shape[1] != M:
        raise NonSquareError(f"network matrix must be square, got {U.shape}")
    if len(inp) != M or len(out) != M:
        raise ModeMismatchError(f"configurations {tuple(inp)}, {tuple(out)} do not match {M} modes")
    if sum(inp) != sum(out):
        raise PhotonMismatchError(f"input has {sum(inp)} photons, output has {sum(out)}")


def build_submatrix(U: np.ndarray, inp: ModeConfiguration, out: ModeConfiguration) -> np.ndarray:
    """N x N matrix whose (j, k) entry is U[p, q].

    Row j belongs to the output mode p that owns photon j of ``out``; column
    k belongs to the input mode q that owns photon k of ``inp``. Hence the
    row of output mode p appears out[p] times and the column of input mode q
    appears inp[q] times.
    """
    U = np.asarray(U, dtype=complex)
    _check_pair(U, inp, out)
    rows = [p for p, count in enumerate(out) for _ in range(count)]
    cols = [q for q, count in enumerate(inp) for _ in range(count)]
    return U[np.ix_(rows, cols)]


def _normalization(inp: Sequence[int], out: Sequence[int]) -> float:
    return math.exp(-0.5 * sum(log_factorial(c) for c in (*inp, *out)))


def transition_amplitude(U: np.ndarray, inp: ModeConfiguration, out: ModeConfiguration) -> complex:
    """<out| U |inp> = Per(Lambda) / sqrt(prod inp! prod out!)."""
    sub = build_submatrix(U, inp, out)
    return permanent(sub) * _normalization(inp, out)


def transfer_amplitudes(
    U: np.ndarray, inp: ModeConfiguration, outputs: Sequence[ModeConfiguration]
) -> np.ndarray:
    """Transition amplitudes from one input to many outputs at once.

    Uses Ryser's formula with the repeated columns of the submatrix grouped:
    a subset that takes k_q of the inp[q] identical columns of mode q occurs
    C(inp[q], k_q) times and gives row sums sum_q k_q U[p, q]. The cost is
    prod_q (inp[q] + 1) instead of 2^N, which keeps the 12-photon blocks cheap.
    """
    U = np.asarray(U, dtype=complex)
    M = U.shape[0]
    outs = np.asarray(outputs, dtype=int).reshape(-1, M)
    N = sum(inp)
    if outs.size and np.any(outs.sum(axis=1) != N):
        raise PhotonMismatchError("every output must carry as many photons as the input")
    if N == 0:
        return np.ones(len(outs), dtype=complex)

    occupied = [q for q in range(M) if inp[q] > 0]
    ks = np.array(list(product(*(range(inp[q] + 1) for q in occupied))), dtype=float)
    weights = np.array(
        [
            (-1) ** (N - int(k.sum())) * math.prod(math.comb(inp[q], int(c)) for q, c in zip(occupied, k))
            for k in ks
        ],
        dtype=float,
    )
    rowsums = ks @ U[:, occupied].T  # (subsets, M)
    # prod_p rowsum[p] ** out[p] for every output at once
    terms = np.ones((len(ks), len(outs)), dtype=complex)
    for p in range(M):
        terms *= rowsums[:, p : p + 1] ** outs[None, :, p]
    pers = weights @ terms
    norms = np.array([_normalization(inp, o) for o in outs.tolist()])
    return pers * norms
