import pytest

from core import qmath
from protocols.singlet import (
    check_evolution_deevolution, check_middle_form, check_rotated_structure,
    check_singlet_invariance, check_transition_invariance, epr_singlet, run_identity_checks,
)
from utils.rng import SeededStream


def test_singlet_is_antisymmetric():
    amplitudes = epr_singlet().amplitudes
    assert amplitudes[1] == pytest.approx(-amplitudes[2])
    assert amplitudes[0] == 0 and amplitudes[3] == 0


@pytest.mark.parametrize("check", [
    check_singlet_invariance, check_evolution_deevolution, check_middle_form, check_rotated_structure,
])
def test_identity_holds_for_random_rotations(check):
    stream = SeededStream(12)
    for _ in range(50):
        assert check(qmath.random_su2(stream)) < 1e-12


def test_transition_probabilities_survive_complement():
    stream = SeededStream(13)
    for _ in range(50):
        a, b = qmath.random_pure_state(stream), qmath.random_pure_state(stream)
        assert check_transition_invariance(a, b) < 1e-12


def test_run_identity_checks():
    checks = run_identity_checks(1000, seed=1)
    names = [check.name for check in checks]
    assert names == [
        "singlet_invariance", "evolution_deevolution", "middle_form",
        "rotated_structure", "transition_invariance", "choi_negativity",
    ]
    for check in checks:
        assert check.passed, (check.name, check.max_deviation)
    choi = checks[-1]
    assert choi.details["min_eigenvalue"] == pytest.approx(-1.0, abs=1e-12)


def test_run_identity_checks_is_reproducible():
    first = [check.max_deviation for check in run_identity_checks(20, seed=4)]
    second = [check.max_deviation for check in run_identity_checks(20, seed=4)]
    assert first == second


def test_run_identity_checks_needs_trials():
    with pytest.raises(ValueError, match="trials"):
        run_identity_checks(0, seed=1)
