import numpy as np
import pytest

from core import qmath
from core.errors import DimensionError
from protocols.nogo import choi_of, complement_antiunitary, complement_map, universal_not_choi
from utils.rng import SeededStream


def test_universal_not_choi_has_eigenvalue_minus_one():
    result = universal_not_choi()
    assert result.min_eigenvalue == pytest.approx(-1.0, abs=1e-12)
    np.testing.assert_allclose(result.eigenvalues, [-1, 1, 1, 1], atol=1e-12)
    assert not result.choi.is_completely_positive


def test_normalized_choi_halves_the_spectrum():
    result = universal_not_choi(normalized=True)
    assert result.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)
    assert np.trace(result.choi.matrix).real == pytest.approx(1.0)


def test_identity_channel_is_completely_positive():
    choi = choi_of(lambda rho: rho)
    assert choi.is_completely_positive
    assert choi.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)


def test_complement_sends_states_to_their_complement():
    stream = SeededStream(6)
    for _ in range(20):
        psi = qmath.random_pure_state(stream)
        image = complement_map(psi.density().matrix)
        np.testing.assert_allclose(image, psi.orthogonal().density().matrix, atol=1e-12)


def test_complement_is_antiunitary_conjugation():
    stream = SeededStream(7)
    for _ in range(20):
        raw = stream.normal(8).reshape(2, 2, 2)
        square = raw[0] + 1j * raw[1]
        # Hermitian input; the two forms differ on non-Hermitian matrices
        matrix = square + square.conj().T
        np.testing.assert_allclose(complement_map(matrix), complement_antiunitary(matrix), atol=1e-12)


def test_complement_map_needs_qubit_input():
    with pytest.raises(DimensionError):
        complement_map(np.eye(3))
