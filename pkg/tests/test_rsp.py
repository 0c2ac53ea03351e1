import cmath
import math

import pytest

from core import qmath
from core.engine import new_session
from core.errors import EnsembleViolationError
from core.qmath import PureQubit
from protocols.rsp import (
    BIT_COMPLEMENT_HELD, BIT_TARGET_HELD, EnsembleKind, correction_for, rsp_average_fidelity,
    rsp_run, validate_ensemble,
)
from utils.rng import SeededStream


def _polar_targets(count: int, seed: int):
    stream = SeededStream(seed)
    for _ in range(count):
        theta = 2 * math.pi * stream.uniform()
        yield PureQubit(math.cos(theta / 2), math.sin(theta / 2))


def _equatorial_targets(count: int, seed: int):
    stream = SeededStream(seed)
    for _ in range(count):
        phi = 2 * math.pi * stream.uniform()
        yield PureQubit(1 / math.sqrt(2), cmath.exp(1j * phi) / math.sqrt(2))


@pytest.mark.parametrize("kind, targets", [
    (EnsembleKind.POLAR, list(_polar_targets(100, 1))),
    (EnsembleKind.EQUATORIAL, list(_equatorial_targets(100, 2))),
])
def test_great_circle_targets_are_exact_in_both_branches(kind, targets):
    for index, target in enumerate(targets):
        for branch in (BIT_COMPLEMENT_HELD, BIT_TARGET_HELD):
            result = rsp_run(target, kind, new_session(index, protocol="rsp"), forced_outcome=branch)
            assert result.alice_outcome == branch
            assert result.fidelity > 1 - 1e-9
            assert result.ledger.as_tuple() == (1, 1, 0)


def test_complement_branch_holds_orthogonal_state():
    target = PureQubit(0.6, 0.8 * cmath.exp(0.3j))
    result = rsp_run(target, EnsembleKind.ARBITRARY, 4, forced_outcome=BIT_COMPLEMENT_HELD)
    assert qmath.fidelity(result.bob_state_before_correction, target.orthogonal()) > 1 - 1e-9
    assert result.fidelity < 1e-9
    assert result.correction_applied == "I"


def test_target_branch_needs_no_correction():
    target = PureQubit(0.6, 0.8 * cmath.exp(0.3j))
    result = rsp_run(target, EnsembleKind.ARBITRARY, 4, forced_outcome=BIT_TARGET_HELD)
    assert result.fidelity > 1 - 1e-9
    assert qmath.fidelity(result.bob_state_before_correction, result.bob_state_after_correction) > 1 - 1e-12


def test_corrections_per_ensemble():
    assert correction_for(EnsembleKind.POLAR, BIT_COMPLEMENT_HELD).label == "i*sigma_y"
    assert correction_for(EnsembleKind.EQUATORIAL, BIT_COMPLEMENT_HELD).label == "sigma_z"
    assert correction_for(EnsembleKind.ARBITRARY, BIT_COMPLEMENT_HELD).label == "I"
    for kind in EnsembleKind:
        assert correction_for(kind, BIT_TARGET_HELD).label == "I"


@pytest.mark.parametrize("kind, target", [
    (EnsembleKind.POLAR, PureQubit(0.6, 0.8j)),
    (EnsembleKind.EQUATORIAL, PureQubit(0.6, 0.8)),
])
def test_declared_ensemble_is_checked(kind, target):
    with pytest.raises(EnsembleViolationError):
        validate_ensemble(target, kind)


def test_polar_accepts_global_phase():
    # same ray as (0.6, 0.8)
    target = PureQubit(0.6j, 0.8j)
    assert validate_ensemble(target, EnsembleKind.POLAR).aV.imag == pytest.approx(0.0)


def test_arbitrary_targets_average_one_half():
    shots = 4000
    std_error = 0.5 / math.sqrt(shots)
    stream = SeededStream(20)
    for index in range(5):
        target = qmath.random_pure_state(stream)
        mean = rsp_average_fidelity(target, EnsembleKind.ARBITRARY, shots, 100 + index)
        assert abs(mean - 0.5) <= 4 * std_error


def test_polar_average_fidelity_is_one():
    assert rsp_average_fidelity(PureQubit(0.8, -0.6), EnsembleKind.POLAR, 200, 3) > 1 - 1e-9


def test_shots_must_be_positive():
    with pytest.raises(ValueError, match="shots"):
        rsp_average_fidelity(qmath.H_STATE, EnsembleKind.ARBITRARY, 0, 1)
