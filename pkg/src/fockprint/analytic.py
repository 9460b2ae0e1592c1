"""Closed-form probabilities of the four-mode circuit for one- and two-photon unknown states."""

from __future__ import annotations

import math
from typing import NamedTuple

from .circuit import SingleModeState
from .errors import InconsistentProbabilitiesError, NotNormalizedError
from .fock import ModeConfiguration

VACUUM = (0, 0, 0, 0)
SINGLE_PHOTON_OUTPUTS = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
N1_LABELS = (VACUUM, *SINGLE_PHOTON_OUTPUTS)

_A = 1.0 / math.sqrt(2.0)


def analytic_probabilities_n1(r0: float, r1: float, phi1: float, alpha: float) -> dict[ModeConfiguration, float]:
    """P(|0000>) and the four one-photon probabilities for r0|0> + r1 e^{i phi1}|1>."""
    if abs(r0 * r0 + r1 * r1 - 1.0) > 1e-9:
        raise NotNormalizedError(f"r0^2 + r1^2 = {r0 * r0 + r1 * r1!r}")
    damp = math.exp(-2.0 * alpha * alpha)
    base = alpha * alpha * r0 * r0 + 0.5 * r1 * r1
    cross = math.sqrt(2.0) * alpha * r0 * r1
    return {
        VACUUM: damp * r0 * r0,
        (1, 0, 0, 0): 0.5 * damp * (base + cross * math.cos(phi1)),
        (0, 1, 0, 0): 0.5 * damp * (base - cross * math.cos(phi1)),
        (0, 0, 1, 0): 0.5 * damp * (base - cross * math.sin(phi1)),
        (0, 0, 0, 1): 0.5 * damp * (base + cross * math.sin(phi1)),
    }


class N1Estimate(NamedTuple):
    r0: float
    r1: float
    phi1: float
    degenerate: bool


def analytic_invert_n1(
    probabilities: dict[ModeConfiguration, float], alpha: float, tolerance: float = 1e-9
) -> N1Estimate:
    """Recover (r0, r1, phi1) from the s <= 1 probabilities.

    r0 follows from the vacuum probability, the phase from the two
    differences P(1000) - P(0100) ~ cos(phi1) and P(0001) - P(0010) ~ sin(phi1).
    When r0 or r1 vanishes the phase is undefined: phi1 = 0 and
    ``degenerate`` is set.
    """
    if alpha <= 0:
        raise ValueError("inversion needs alpha > 0")
    damp = math.exp(-2.0 * alpha * alpha)
    r0_sq = probabilities[VACUUM] / damp
    if r0_sq > 1.0 + tolerance or r0_sq < -tolerance:
        raise InconsistentProbabilitiesError(
            f"vacuum probability {probabilities[VACUUM]!r} exceeds e^(-2 alpha^2) = {damp!r}"
        )
    r0_sq = min(max(r0_sq, 0.0), 1.0)
    r0 = math.sqrt(r0_sq)
    r1 = math.sqrt(1.0 - r0_sq)
    scale = math.sqrt(2.0) * alpha * r0 * r1 * damp
    if r0 < tolerance or r1 < tolerance or scale == 0.0:
        return N1Estimate(r0, r1, 0.0, True)
    cos_phi = (probabilities[(1, 0, 0, 0)] - probabilities[(0, 1, 0, 0)]) / scale
    sin_phi = (probabilities[(0, 0, 0, 1)] - probabilities[(0, 0, 1, 0)]) / scale
    return N1Estimate(r0, r1, math.atan2(sin_phi, cos_phi) % (2.0 * math.pi), False)


def analytic_probabilities_n2(
    state: SingleModeState, alpha: float, *, printed: bool = True
) -> dict[ModeConfiguration, float]:
    """Closed forms for P(|2000>) and P(|0020>) when the unknown state has N = 2.

    With ``printed=True`` (default) P(|0020>) carries the reference sign of
    the two sine terms. ``printed=False`` flips them, which is the form that
    follows from the reference phases of :func:`fockprint.circuit.tomography_input`
    and the matrix of :func:`fockprint.circuit.fixed_four_mode_circuit`.
    """
    if state.N != 2:
        raise ValueError(f"need an N = 2 state, got N = {state.N}")
    r0, r1, r2 = (float(x) for x in state.r)
    _, p1, p2 = (float(x) for x in state.phi)
    if abs(r0 * r0 + r1 * r1 + r2 * r2 - 1.0) > 1e-9:
        raise NotNormalizedError("N = 2 state is not normalised")
    a = alpha
    root2 = math.sqrt(2.0)
    pref = 0.25 * math.exp(-2.0 * a * a)
    common = a**4 * r0 * r0 / 2.0 + a * a * r1 * r1 + r2 * r2 / 4.0
    r0r2 = root2 * a * a * r0 * r2 * math.cos(p2) / 2.0
    p2000 = pref * (common + root2 * a**3 * r0 * r1 * math.cos(p1) + r0r2 + a * r1 * r2 * math.cos(p1 - p2))
    sign = 1.0 if printed else -1.0
    p0020 = pref * (
        common
        + sign * root2 * a**3 * r0 * r1 * math.sin(p1)
        - r0r2
        - sign * a * r1 * r2 * math.sin(p1 - p2)
    )
    return {(2, 0, 0, 0): p2000, (0, 0, 2, 0): p0020}


def _falling(x: int, k: int) -> int:
    """x! / (x - k)!, zero when k > x."""
    if k > x:
        return 0
    return math.perm(x, k)


def closed_form_permanent(inp: ModeConfiguration, out: ModeConfiguration) -> float:
    """Permanent of the fixed-circuit submatrix for an input |(s-l-n), 0, l, n>.

    Photons from mode 1 reach only output modes 1, 2 and photons from mode 4
    only modes 3, 4; of the l photons from mode 3, d go to modes 1, 2 and
    q = l - d to modes 3, 4, with d fixed by the output. The sum over x
    (y) counts mode-3 photons landing in output mode 2 (3).
    """
    m, zero, ell, n = inp
    g, h, k, f = out
    if zero != 0:
        raise ValueError("closed form assumes an empty second input mode")
    if m + ell + n != g + h + k + f:
        return 0.0
    d = g + h - m
    if d < 0 or d > ell:
        return 0.0
    q = ell - d
    upper = sum(
        math.comb(d, x) * (-1) ** x * math.factorial(m) * _falling(g, d - x) * _falling(h, x)
        for x in range(d + 1)
    )
    lower = sum(
        math.comb(q, y) * (-1) ** y * math.factorial(n) * _falling(f, q - y) * _falling(k, y)
        for y in range(q + 1)
    )
    return (-1) ** k * math.comb(ell, d) * _A ** (m + n + 2 * ell) * upper * lower
