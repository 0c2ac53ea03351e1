import numpy as np
import pytest

from core.errors import DimensionError, InvalidEffectError
from core.qmath import PoincareVector
from protocols.joint import (
    JointOperator, identity_effect, joint_discrepancy, joint_equalize_known_phi,
    joint_equalize_literal, joint_probability, joint_probability_matrix, joint_sign_flip_scan,
    singlet_projector, sphere_grid,
)

Z = PoincareVector(0.0, 0.0, 1.0)


def _generic_effect(s=(0.0, 0.3, -0.1)) -> JointOperator:
    t = 0.02 * np.arange(9, dtype=float).reshape(3, 3) - 0.08
    return JointOperator(PoincareVector(0.2, 0.0, 0.1), PoincareVector(*s), t)


def test_singlet_projector_matrix():
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(singlet_projector().matrix, np.outer(singlet, singlet), atol=1e-12)


def test_singlet_projector_branches():
    pi = singlet_projector()
    assert joint_probability(pi, Z, Z) == pytest.approx(0.0, abs=1e-12)
    assert joint_probability(pi, -Z, Z) == pytest.approx(0.5, abs=1e-12)
    assert joint_discrepancy(pi, Z, Z) == pytest.approx(0.5, abs=1e-12)


def test_no_sign_flip_closes_the_gap():
    rows = joint_sign_flip_scan(singlet_projector(), Z, Z)
    assert {(row.sign_r, row.sign_s) for row in rows} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    for row in rows:
        assert row.discrepancy == pytest.approx(0.5, abs=1e-12)


def test_formula_matches_trace():
    pi = _generic_effect()
    for n in sphere_grid(4):
        for m in sphere_grid(4):
            assert joint_probability(pi, n, m) == pytest.approx(joint_probability_matrix(pi, n, m), abs=1e-12)


def test_from_matrix_recovers_coefficients():
    pi = _generic_effect()
    back = JointOperator.from_matrix(pi.matrix)
    np.testing.assert_allclose(back.flat(), pi.flat(), atol=1e-12)


def test_from_flat_needs_fifteen_numbers():
    with pytest.raises(DimensionError, match="15 numbers"):
        JointOperator.from_flat([0.0] * 14)


def test_non_effect_rejected():
    with pytest.raises(InvalidEffectError, match="eigenvalues"):
        JointOperator(PoincareVector(0, 0, 0), PoincareVector(0, 0, 0), 2 * np.eye(3))


def test_identity_effect_always_quarter():
    for n in sphere_grid(3):
        assert joint_probability(identity_effect(), n, Z) == pytest.approx(0.25)


@pytest.mark.parametrize("pi", [singlet_projector(), _generic_effect()])
def test_exact_equalization_passes_for_every_phi(pi):
    for m in sphere_grid(10)[::10]:
        flipped, m_flipped, certificate = joint_equalize_known_phi(pi, m)
        assert certificate.passed
        assert certificate.grid_points == 100
        assert certificate.max_deviation < 1e-12
        np.testing.assert_array_equal(m_flipped.array, -m.array)
        np.testing.assert_allclose(flipped.t, pi.t, atol=1e-12)
        np.testing.assert_allclose(flipped.r.array, -pi.r.array, atol=1e-12)
        np.testing.assert_allclose(flipped.s.array, -pi.s.array, atol=1e-12)


def test_literal_equalization_fails_when_s_has_a_component_along_m():
    _, _, certificate = joint_equalize_literal(_generic_effect(s=(0.0, 0.0, 0.3)), Z)
    assert not certificate.passed
    assert len(certificate.failures) == certificate.grid_points
    assert certificate.terms["s.m"] == "s.(-m) = -s.m"


def test_literal_equalization_works_when_s_is_orthogonal_to_m():
    _, _, certificate = joint_equalize_literal(_generic_effect(s=(0.3, 0.0, 0.0)), Z)
    assert certificate.passed
    assert not certificate.failures
