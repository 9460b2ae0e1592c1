import math

import numpy as np
import pytest

from fockprint.circuit import fixed_four_mode_circuit
from fockprint.errors import NonSquareError, PhotonMismatchError, ModeMismatchError, SizeExceededError
from fockprint.fock import enumerate_configurations
from fockprint.permanent import build_submatrix, permanent, transfer_amplitudes, transition_amplitude
from oracles import naive_permanent, random_complex, random_unitary


def test_small_permanents():
    assert permanent(np.array([[2 - 1j]])) == 2 - 1j
    a, b, c, d = 1 + 2j, -0.5, 3j, 0.25
    assert permanent(np.array([[a, b], [c, d]])) == pytest.approx(a * d + b * c)
    assert permanent(np.ones((3, 3))) == pytest.approx(6.0)
    assert permanent(np.zeros((0, 0))) == 1.0


def test_random_5x5_matches_permutation_sum(rng):
    A = random_complex(rng, (5, 5))
    ref = naive_permanent(A)
    assert abs(permanent(A) - ref) / abs(ref) < 1e-10


@pytest.mark.parametrize("n", range(1, 7))
def test_transpose_invariance(rng, n):
    A = random_complex(rng, (n, n))
    assert permanent(A.T) == pytest.approx(permanent(A), rel=1e-12)


def test_errors():
    with pytest.raises(NonSquareError):
        permanent(np.ones((2, 3)))
    with pytest.raises(SizeExceededError):
        permanent(np.ones((26, 26)))


def test_submatrix_identity_and_vacuum():
    U = np.eye(4)
    np.testing.assert_array_equal(build_submatrix(U, (0, 1, 0, 0), (0, 1, 0, 0)), [[1]])
    assert build_submatrix(U, (0, 0, 0, 0), (0, 0, 0, 0)).shape == (0, 0)


def test_submatrix_prefix_sum_rule(rng):
    U = random_unitary(rng, 4)
    sub = build_submatrix(U, (0, 1, 0, 2), (1, 0, 1, 1))
    # rows: output modes 1, 3, 4; columns: input modes 2, 4, 4 (1-based)
    expected = U[np.ix_([0, 2, 3], [1, 3, 3])]
    np.testing.assert_array_equal(sub, expected)


def test_submatrix_multiplicities(rng):
    U = random_unitary(rng, 4)
    inp, out = (2, 0, 1, 1), (0, 3, 0, 1)
    sub = build_submatrix(U, inp, out)
    for q, count in enumerate(inp):
        assert sum(np.allclose(sub[:, k], U[[1, 1, 1, 3], q]) for k in range(4)) == count


def test_submatrix_errors():
    U = np.eye(4)
    with pytest.raises(PhotonMismatchError):
        build_submatrix(U, (1, 0, 0, 0), (1, 1, 0, 0))
    with pytest.raises(ModeMismatchError):
        build_submatrix(U, (1, 0, 0), (1, 0, 0))


def test_transition_amplitude_simple_cases(rng):
    U = random_unitary(rng, 4)
    assert transition_amplitude(U, (0,) * 4, (0,) * 4) == 1
    # photon in mode 1 to mode 2 picks the entry in row 2 (output), column 1 (input)
    assert transition_amplitude(U, (1, 0, 0, 0), (0, 1, 0, 0)) == pytest.approx(U[1, 0])


def test_two_photons_same_port_of_balanced_splitter():
    a = 1 / math.sqrt(2)
    U = np.array([[a, -a], [a, a]])
    probs = [abs(transition_amplitude(U, (2, 0), o)) ** 2 for o in [(2, 0), (1, 1), (0, 2)]]
    np.testing.assert_allclose(probs, [0.25, 0.5, 0.25], atol=1e-15)


@pytest.mark.parametrize("inp", [(1, 0, 1, 1), (2, 0, 0, 2), (0, 3, 1, 0), (1, 1, 1, 1)])
def test_output_probabilities_sum_to_one(rng, inp):
    U = random_unitary(rng, 4)
    total = sum(abs(transition_amplitude(U, inp, o)) ** 2 for o in enumerate_configurations(4, sum(inp)))
    assert abs(total - 1.0) < 1e-10


@pytest.mark.parametrize("inp", [(0, 0, 0, 0), (1, 0, 0, 0), (2, 0, 1, 1), (0, 2, 0, 3), (1, 1, 1, 1)])
def test_grouped_ryser_matches_gray_code_ryser(rng, inp):
    U = random_unitary(rng, 4)
    outs = enumerate_configurations(4, sum(inp))
    fast = transfer_amplitudes(U, inp, outs)
    slow = np.array([transition_amplitude(U, inp, o) for o in outs])
    np.testing.assert_allclose(fast, slow, atol=1e-13)


def test_fixed_circuit_grouped_ryser_agrees():
    U = fixed_four_mode_circuit().unitary
    for inp in enumerate_configurations(4, 3):
        outs = enumerate_configurations(4, 3)
        np.testing.assert_allclose(
            transfer_amplitudes(U, inp, outs), [transition_amplitude(U, inp, o) for o in outs], atol=1e-14
        )
