import math

import numpy as np
import pytest

from core import qmath
from core.errors import DimensionError, DomainError, NormalizationError
from core.qmath import PoincareVector, PureQubit
from utils.rng import SeededStream, derive_seed


def test_make_su2_maps_h_to_target():
    u = qmath.make_su2(0.6, 0.8j)
    np.testing.assert_allclose(u.matrix[:, 0], [0.6, 0.8j])
    np.testing.assert_allclose(u.matrix[:, 1], [0.8j, 0.6])
    assert abs(u.determinant - 1.0) < qmath.ATOL


@pytest.mark.parametrize("alpha, beta, expected", [
    (1.0, 0.0, [[1, 0], [0, 1]]),
    (1 / math.sqrt(2), 1 / math.sqrt(2), np.array([[1, -1], [1, 1]]) / math.sqrt(2)),
    (0.0, 1.0, [[0, -1], [1, 0]]),
])
def test_make_su2_examples(alpha, beta, expected):
    u = qmath.make_su2(alpha, beta)
    np.testing.assert_allclose(u.matrix, expected, atol=1e-12)
    np.testing.assert_allclose(u.matrix.conj().T @ u.matrix, np.eye(2), atol=1e-12)


def test_make_su2_rejects_unnormalized():
    with pytest.raises(NormalizationError, match="expected 1"):
        qmath.make_su2(0.9, 0.9)


def test_pure_qubit_rejects_unnormalized():
    with pytest.raises(NormalizationError):
        PureQubit(1.0, 1.0)


@pytest.mark.parametrize("psi, expected", [
    (qmath.H_STATE, (0, 0, 1)),
    (qmath.V_STATE, (0, 0, -1)),
    (PureQubit(1 / math.sqrt(2), 1 / math.sqrt(2)), (1, 0, 0)),
    (PureQubit(1 / math.sqrt(2), 1j / math.sqrt(2)), (0, 1, 0)),
])
def test_bloch_from_state(psi, expected):
    np.testing.assert_allclose(qmath.bloch_from_state(psi).array, expected, atol=1e-12)


def test_state_bloch_round_trip():
    stream = SeededStream(3)
    for _ in range(1000):
        psi = qmath.random_pure_state(stream)
        back = qmath.state_from_bloch(qmath.bloch_from_state(psi))
        assert qmath.fidelity(psi, back) > 1 - qmath.ROUND_TRIP_TOL


def test_density_and_bloch_agree():
    n = PoincareVector.from_angles(0.7, 1.9)
    rho = qmath.density_from_bloch(n)
    np.testing.assert_allclose(qmath.bloch_from_density(rho).array, n.array, atol=1e-12)


def test_canonical_phase():
    psi = PureQubit(-0.6, 0.8j).canonical()
    assert psi.aH.real == pytest.approx(0.6) and psi.aH.imag == 0.0
    assert psi.aV == pytest.approx(-0.8j)
    assert PureQubit(0, -1j).canonical().aV == pytest.approx(1.0)


def test_orthogonal_is_antipodal():
    psi = PureQubit(0.6, 0.8 * np.exp(0.4j))
    perp = psi.orthogonal()
    assert qmath.fidelity(psi, perp) < qmath.ATOL
    np.testing.assert_allclose(qmath.bloch_from_state(perp).array,
                               -qmath.bloch_from_state(psi).array, atol=1e-12)


def test_orthogonal_with_complex_h_amplitude():
    psi = PureQubit(0.6 * complex(math.cos(0.9), math.sin(0.9)), 0.8)
    perp = psi.orthogonal()
    assert qmath.fidelity(psi, perp) < 1e-12
    np.testing.assert_allclose(qmath.bloch_from_state(perp).array,
                               -qmath.bloch_from_state(psi).array, atol=1e-12)


def test_orthogonal_of_random_states():
    stream = SeededStream(21)
    for _ in range(1000):
        psi = qmath.random_pure_state(stream)
        assert qmath.fidelity(psi, psi.orthogonal()) < 1e-12


@pytest.mark.parametrize("a, b, expected", [
    (qmath.H_STATE, qmath.H_STATE, 1.0),
    (qmath.H_STATE, qmath.V_STATE, 0.0),
    (qmath.H_STATE, PureQubit(1 / math.sqrt(2), 1 / math.sqrt(2)), 0.5),
])
def test_fidelity_examples(a, b, expected):
    assert qmath.fidelity(a, b) == pytest.approx(expected, abs=1e-12)
    assert qmath.fidelity(b, a) == pytest.approx(expected, abs=1e-12)


def test_poincare_vector_outside_sphere():
    with pytest.raises(DomainError, match="exceeds 1"):
        PoincareVector(1.0, 1.0, 0.0)


def test_partial_trace_of_singlet_is_maximally_mixed():
    singlet = qmath.TwoQubitState(np.array([0, 1, -1, 0]) / np.sqrt(2))
    for keep in (0, 1):
        reduced = qmath.partial_trace(singlet.density(), keep=keep)
        np.testing.assert_allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_of_product_state():
    a = PureQubit(0.6, 0.8)
    b = PureQubit(1 / math.sqrt(2), 1j / math.sqrt(2))
    product = qmath.tensor(a, b).density()
    np.testing.assert_allclose(qmath.partial_trace(product, 0).matrix, a.density().matrix, atol=1e-12)
    np.testing.assert_allclose(qmath.partial_trace(product, 1).matrix, b.density().matrix, atol=1e-12)


@pytest.mark.parametrize("keep", [-1, 2])
def test_partial_trace_rejects_bad_subsystem(keep):
    singlet = qmath.TwoQubitState(np.array([0, 1, -1, 0]) / np.sqrt(2))
    with pytest.raises(DomainError, match="subsystem index"):
        qmath.partial_trace(singlet.density(), keep=keep)


def test_tensor_examples():
    np.testing.assert_allclose(qmath.tensor(qmath.H_STATE, qmath.V_STATE).amplitudes, [0, 1, 0, 0])
    np.testing.assert_allclose(qmath.tensor(qmath.IDENTITY, qmath.IDENTITY), np.eye(4))
    up = qmath.density_from_bloch(PoincareVector(0.0, 0.0, 1.0))
    np.testing.assert_allclose(qmath.tensor(up, up).matrix, np.diag([1, 0, 0, 0]), atol=1e-12)


def test_tensor_rejects_mixed_arguments():
    with pytest.raises(DimensionError):
        qmath.tensor(qmath.H_STATE, qmath.IDENTITY)


def test_measure_computational_collapses():
    outcome, state = qmath.measure_computational(qmath.V_STATE, SeededStream(0))
    assert outcome == 1
    assert qmath.fidelity(state, qmath.V_STATE) == pytest.approx(1.0)


def test_measure_computational_statistics():
    plus = PureQubit(1 / math.sqrt(2), 1 / math.sqrt(2))
    stream = SeededStream(42)
    draws = 100_000
    h_count = sum(1 - qmath.measure_computational(plus, stream)[0] for _ in range(draws))
    sigma = math.sqrt(0.25 / draws)
    assert abs(h_count / draws - 0.5) <= 4 * sigma


def test_measure_computational_is_reproducible():
    plus = PureQubit(1 / math.sqrt(2), 1j / math.sqrt(2))

    def outcomes(seed):
        stream = SeededStream(seed)
        return [qmath.measure_computational(plus, stream)[0] for _ in range(200)]

    assert outcomes(42) == outcomes(42)
    assert outcomes(42) != outcomes(43)


def test_measure_forced_zero_weight_branch():
    with pytest.raises(DomainError, match="zero probability"):
        qmath.measure_computational(qmath.H_STATE, SeededStream(0), forced=1)


def test_measure_two_photon_subsystem():
    singlet = qmath.TwoQubitState(np.array([0, 1, -1, 0]) / np.sqrt(2))
    outcome, collapsed = qmath.measure_computational(singlet, SeededStream(1), subsystem=0, forced=0)
    assert outcome == 0
    np.testing.assert_allclose(np.abs(collapsed.amplitudes), [0, 1, 0, 0], atol=1e-12)


def test_random_su2_is_special_unitary():
    stream = SeededStream(9)
    for _ in range(1000):
        u = qmath.random_su2(stream)
        np.testing.assert_allclose(u.matrix.conj().T @ u.matrix, np.eye(2), atol=1e-12)
        assert abs(u.determinant - 1.0) < 1e-12


def test_seeded_stream_is_reproducible():
    a = [SeededStream(5).spawn(2).uniform() for _ in range(3)]
    assert len(set(a)) == 1
    assert SeededStream(5).spawn(2).uniform() != SeededStream(5).spawn(3).uniform()
    assert derive_seed(5, 1) == derive_seed(5, 1)
    assert derive_seed(5, 1) != derive_seed(5, 2)


def test_seeded_stream_rejects_negative_seed():
    with pytest.raises(ValueError):
        SeededStream(-1)
